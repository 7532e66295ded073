import os
from pathlib import Path
from typing import Optional, Sequence, Union

from hydra import compose, initialize_config_dir
from hydra.core.global_hydra import GlobalHydra
from omegaconf import DictConfig, OmegaConf

from .errors import StructuralError
from .utils import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "bellcone.yaml"
TOLERANCE_ENV = "BELLCONE_TOL"


def load_config(
    config_path: Optional[PathLike] = None,
    overrides: Sequence[str] = (),
) -> DictConfig:
    """
    Compose the bellcone configuration.

    config_path: Optional[PathLike]
        YAML file to compose, `configs/bellcone.yaml` by default
    overrides: Sequence[str]
        hydra-style `key=value` overrides applied on top of the file

    The `BELLCONE_TOL` environment variable, when set, overrides both the
    validation and condition tolerances.
    """
    path = Path(config_path or DEFAULT_CONFIG).resolve()
    if not path.is_file():
        raise StructuralError(f"Configuration file not found: {path}")

    if GlobalHydra.instance().is_initialized():
        GlobalHydra.instance().clear()
    try:
        with initialize_config_dir(config_dir=str(path.parent), version_base="1.2"):
            cfg = compose(config_name=path.stem, overrides=list(overrides))
    except Exception as e:
        raise StructuralError(f"Could not compose configuration {path.name}: {e}") from e
    OmegaConf.resolve(cfg)

    env_tol = os.environ.get(TOLERANCE_ENV)
    if env_tol:
        try:
            tol = float(env_tol)
        except ValueError:
            raise StructuralError(f"{TOLERANCE_ENV} is not a number: {env_tol!r}")
        logger.debug(f"Tolerance overridden from {TOLERANCE_ENV}: {tol}")
        cfg.tolerance.validation = tol
        cfg.tolerance.condition = tol
    return cfg
