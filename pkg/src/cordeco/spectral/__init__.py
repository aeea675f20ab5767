from .bosonic import (
    BosonicChainParams,
    SingularPointError,
    bosonic_correlation_exact,
    bosonic_spectral,
    bosonic_tau0_profile,
)
from .ising import (
    IsingParams,
    ising_one_sided,
    ising_spatial,
    ising_spatiotemporal,
    ising_spectral,
    ising_spectral_zero,
)
from .kernels import kernel_matrix, phenomenological_kernel
from .models import (
    MODEL_KINDS,
    BosonicChainModel,
    IsingModel,
    PhenomenologicalModel,
    Site,
    SpectralModel,
    TabulatedModel,
)
from .tabulated import SpectralTable, TableError, load_table

__all__ = [
    "BosonicChainModel", "BosonicChainParams", "IsingModel", "IsingParams", "MODEL_KINDS",
    "PhenomenologicalModel", "SingularPointError", "Site", "SpectralModel", "SpectralTable",
    "TableError", "TabulatedModel", "bosonic_correlation_exact", "bosonic_spectral",
    "bosonic_tau0_profile", "ising_one_sided", "ising_spatial", "ising_spatiotemporal",
    "ising_spectral", "ising_spectral_zero", "kernel_matrix", "load_table",
    "phenomenological_kernel",
]
