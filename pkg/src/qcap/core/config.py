from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(extra="ignore", frozen=True)

    # Linear algebra
    rank_tol: float = 1e-10  # Eigenvalues at or below this count as zero
    state_tol: float = 1e-10  # Hermiticity, positivity, trace and isometry checks
    entropy_tol: float = 1e-12

    # Singularity method
    rate_margin: float = 1e-9
    bias_margin: float = 1e-9
    probe_eps_grid: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    fit_eps_grid: tuple[float, ...] = (1e-4, 1e-5, 1e-6)
    fit_spread: float = 0.05
    fit_zero_tol: float = 1e-7
    scan_samples: int = 64

    # Extended precision
    mp_digits: int = 100
    deep_eps_exponents: tuple[int, ...] = tuple(range(3, 61, 3))

    # Optimizer
    restarts: int = 20
    optimizer_tol: float = 1e-7
    optimizer_max_evals: int = 4000
    optimizer_evals_per_param: int = 400
    golden_tol: float = 1e-10
    golden_grid_points: int = 200

    seed: int = 0

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # explicit overrides only: no environment, no .env
        return (init_settings,)


settings = Settings()
