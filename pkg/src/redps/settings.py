import os

import yaml
from pydantic import BaseSettings, root_validator


class Settings(BaseSettings):
    # rate_models
    tol_newton: float = 1e-12
    newton_max_iter: int = 100
    domain_margin: float = 1e-9
    # event_sets
    tol_member: float = 1e-9
    # dominating
    tol_feas: float = 1e-8
    tol_kkt: float = 1e-8
    qp_max_iter: int = 500
    cut_delta_scale: float = 1e-7
    tie_rtol: float = 1e-10
    default_C: float = 1.5
    max_points: int = 1000
    # sampling
    chunk_size: int = 65536
    threads: int = 1
    # inference / bench
    default_alpha: float = 0.05
    oracle_rtol: float = 1e-6
    overshoot_rtol: float = 1e-5

    class Config:
        validate_assignment = True
        extra = "ignore"
        env_prefix = "REDPS_"

    @root_validator(allow_reuse=True)
    def validate_positive(cls, values):
        for key, value in values.items():
            if isinstance(value, (int, float)) and value <= 0:
                raise ValueError(f"{key} must be positive, got {value}")
        if values.get("default_C", 2.0) <= 1:
            raise ValueError("default_C must be greater than 1")
        return values

    def update_from_yaml(self, file_path: str):
        new_settings = load_settings_from_yaml(file_path)
        self.update_settings(**new_settings.dict())

    def update_settings(self, **kwargs):
        for key, value in kwargs.items():
            if hasattr(self, key):
                setattr(self, key, value)


def load_settings_from_yaml(file_path: str) -> Settings:
    # Bare file names resolve next to the package
    if "/" not in file_path:
        current_path = os.path.dirname(os.path.abspath(__file__))

        file_path = os.path.join(current_path, file_path)

    with open(file_path, "r") as f:
        settings_dict = yaml.safe_load(f) or {}

    return Settings(**settings_dict)


settings = load_settings_from_yaml("config.yaml")
