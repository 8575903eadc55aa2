"""Process-wide registry of fitted rational surfaces."""

from __future__ import annotations

import logging
import threading
from pathlib import Path

from pathgrad.config import get_config
from pathgrad.core.exceptions import CoefficientFileError
from pathgrad.shape_grad.rational import RationalSurface

logger = logging.getLogger(__name__)

COEFFICIENT_FILES = {
    "gamma": "gamma_rational.json",
    "beta": "beta_rational.json",
}


class SurfaceRegistry:
    """Rational surfaces keyed by distribution, loaded once per directory.

    A missing file yields ``None`` and, under the ``oracle`` fallback
    policy, the caller switches to the exact slow path.
    """

    def __init__(self, directory: Path | str | None = None, fallback: str | None = None):
        config = get_config()
        self.directory = Path(directory) if directory is not None else config.coefficient_dir
        self.fallback = fallback or config.coefficient_fallback
        if self.fallback not in ("oracle", "error"):
            raise ValueError(f"Unknown coefficient fallback policy: {self.fallback}")
        self._surfaces: dict[str, RationalSurface | None] = {}
        self._warned: set[str] = set()
        self._lock = threading.Lock()

    def surface(self, distribution: str) -> RationalSurface | None:
        """Surface for ``distribution`` or None when no file exists.

        Raises:
            CoefficientFileError: If the file exists but is invalid, or is
                missing under the ``error`` policy
        """
        with self._lock:
            if distribution not in self._surfaces:
                self._surfaces[distribution] = self._load(distribution)
            return self._surfaces[distribution]

    def _load(self, distribution: str) -> RationalSurface | None:
        from pathgrad.io.coefficients import read_coefficient_file

        path = self.directory / COEFFICIENT_FILES[distribution]
        if not path.exists():
            if self.fallback == "error":
                raise CoefficientFileError(f"No coefficient file at {path}")
            return None
        surface = read_coefficient_file(path, distribution)
        logger.debug("Loaded %s rational surface from %s", distribution, path)
        return surface

    def warn_fallback(self, distribution: str) -> None:
        """Log the oracle fallback once per distribution."""
        with self._lock:
            if distribution in self._warned:
                return
            self._warned.add(distribution)
        logger.warning(
            "No %s coefficient file in %s; rational region uses the oracle (slow path). "
            "Run `pathgrad fit-rational %s` to generate it.",
            distribution, self.directory, distribution,
        )


# Global registry instance
_registry: SurfaceRegistry | None = None


def get_registry(reload: bool = False) -> SurfaceRegistry:
    """Get the global surface registry.

    Args:
        reload: Rebuild from the current configuration
    """
    global _registry
    if _registry is None or reload:
        _registry = SurfaceRegistry()
    return _registry


def set_registry(registry: SurfaceRegistry) -> None:
    """Set the global surface registry."""
    global _registry
    _registry = registry
