"""Documented warning codes attached to generators and run reports."""
from __future__ import annotations

from dataclasses import asdict, dataclass

CODES = {
    "W001": "markov-smoothness: the spectral function varies by more than 10% across the "
            "system's Bohr frequencies, so the Markov approximation may be poor",
    "W002": "clamped-eigenvalue: tiny negative coefficient eigenvalues inside the PSD "
            "tolerance were clamped to zero",
    "W003": "non-cp: the dissipator's coefficient matrix is not positive semi-definite, "
            "so the dynamics are not completely positive",
    "W004": "kernel-asymmetry: C_kj(w) differs from conj(C_jk(w)); the two textbook forms "
            "of the Redfield q-hat matrices disagree for this model",
    "W005": "non-exponential: a decay-rate fit has residual above 1e-3",
    "W006": "secular-ratio: Bohr-frequency separations are less than 10x the largest decay "
            "rate, so the secular approximation is questionable",
    "W007": "psd-witness: a negative leading principal minor certifies non-positivity",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __post_init__(self):
        if self.code not in CODES:
            raise ValueError(f"undocumented diagnostic code {self.code}")

    def to_dict(self) -> dict:
        return asdict(self)
