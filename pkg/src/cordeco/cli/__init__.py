from .config import SCENARIOS, ConfigError, ScenarioConfig, parse_config, validate
from .main import main
from .scenarios import RunReport, build_model, run_scenario

__all__ = ["ConfigError", "RunReport", "SCENARIOS", "ScenarioConfig", "build_model", "main",
           "parse_config", "run_scenario", "validate"]
