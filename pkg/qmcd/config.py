import os
from pathlib import Path
from typing import List


class Settings:
    # Data files
    data_dir: str = os.getenv("QMCD_DATA_DIR", str(Path(__file__).resolve().parent / "data"))
    direction_numbers_file: str = os.getenv("QMCD_DIRECTION_NUMBERS_FILE", "new-joe-kuo-6.21201")

    # App Settings
    app_env: str = os.getenv("QMCD_ENV", "development")
    log_level: str = os.getenv("QMCD_LOG_LEVEL", "INFO")
    log_format: str = os.getenv("QMCD_LOG_FORMAT", "console")
    jobs: int = int(os.getenv("QMCD_JOBS", "1"))

    # Solver budgets
    lp_budget: int = int(os.getenv("QMCD_LP_BUDGET", str(512 * 512)))
    star_budget: int = int(os.getenv("QMCD_STAR_BUDGET", str(2 ** 26)))
    sinkhorn_tol: float = float(os.getenv("QMCD_SINKHORN_TOL", "1e-9"))
    sinkhorn_max_iter: int = int(os.getenv("QMCD_SINKHORN_MAX_ITER", "10000"))
    full_data_cap: int = int(os.getenv("QMCD_FULL_DATA_CAP", str(2 ** 13)))

    @property
    def is_production(self) -> bool:
        return self.app_env.lower() == "production"

    @property
    def direction_numbers_path(self) -> Path:
        return Path(self.data_dir) / self.direction_numbers_file

    def validate_config(self) -> List[str]:
        """Validate settings and return list of warnings/errors."""
        warnings = []

        if not Path(self.data_dir).is_dir():
            warnings.append(f"WARNING: QMCD_DATA_DIR {self.data_dir} does not exist, bundled scipy direction numbers will be used")
        if self.lp_budget <= 0:
            warnings.append("CRITICAL: QMCD_LP_BUDGET must be positive")
        if self.star_budget <= 0:
            warnings.append("CRITICAL: QMCD_STAR_BUDGET must be positive")
        if self.sinkhorn_tol <= 0:
            warnings.append("CRITICAL: QMCD_SINKHORN_TOL must be positive")
        if self.jobs < 1:
            warnings.append("WARNING: QMCD_JOBS below 1, falling back to a single worker")
        if self.is_production and self.log_format != "json":
            warnings.append("WARNING: console log format in production")

        return warnings


settings = Settings()
