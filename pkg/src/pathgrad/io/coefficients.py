"""Coefficient file reader/writer.

Files are JSON documents produced by ``pathgrad fit-rational``. The header
fields ``format`` and ``monomial_order`` describe the layout; everything
else is the surface plus its validation report.
"""

from __future__ import annotations

import logging
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from pathgrad.core.exceptions import CoefficientFileError
from pathgrad.oracle.models import ValidationReport
from pathgrad.shape_grad.rational import MONOMIAL_ORDER, RationalSurface

logger = logging.getLogger(__name__)

FORMAT_VERSION = "pathgrad-rational/1"


class CoefficientFile(BaseModel):
    """On-disk representation of a RationalSurface."""

    format: str = Field(default=FORMAT_VERSION)
    monomial_order: str = Field(default=MONOMIAL_ORDER)
    distribution: str
    region_id: str
    transforms: list[str]
    numerator_degrees: list[int]
    denominator_degrees: list[int]
    prefactor: str
    numerator: list[float]
    denominator: list[float]
    validation: ValidationReport | None = None
    fit_seed: int | None = None

    @classmethod
    def from_surface(cls, surface: RationalSurface, report: ValidationReport | None = None) -> CoefficientFile:
        return cls(
            distribution=surface.distribution,
            region_id=surface.region_id,
            transforms=list(surface.transforms),
            numerator_degrees=list(surface.numerator_degrees),
            denominator_degrees=list(surface.denominator_degrees),
            prefactor=surface.prefactor,
            numerator=[float(c) for c in surface.numerator],
            denominator=[float(c) for c in surface.denominator],
            validation=report,
            fit_seed=surface.fit_seed,
        )

    def to_surface(self) -> RationalSurface:
        return RationalSurface(
            distribution=self.distribution,
            region_id=self.region_id,
            transforms=tuple(self.transforms),
            numerator_degrees=tuple(self.numerator_degrees),
            denominator_degrees=tuple(self.denominator_degrees),
            numerator=self.numerator,
            denominator=self.denominator,
            prefactor=self.prefactor,
            validation_max_rel_error=self.validation.max_rel_error if self.validation else None,
            fit_seed=self.fit_seed,
        )


def write_coefficient_file(
    surface: RationalSurface, path: Path | str, report: ValidationReport | None = None
) -> Path:
    """Write a surface (and its validation report) as JSON.

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = CoefficientFile.from_surface(surface, report).model_dump_json(indent=2)
    path.write_text(payload + "\n")
    logger.info("Wrote %s surface to %s", surface.distribution, path)
    return path


def read_coefficient_file(path: Path | str, distribution: str | None = None) -> RationalSurface:
    """Load a RationalSurface.

    Args:
        path: Coefficient file
        distribution: Expected distribution name, checked if given

    Raises:
        CoefficientFileError: If the file is missing, malformed, or for
            another distribution
    """
    path = Path(path)
    try:
        document = CoefficientFile.model_validate_json(path.read_text())
    except OSError as e:
        raise CoefficientFileError(f"Cannot read coefficient file {path}", cause=e) from e
    except ValidationError as e:
        raise CoefficientFileError(f"Malformed coefficient file {path}", cause=e) from e
    if document.format != FORMAT_VERSION:
        raise CoefficientFileError(f"{path}: unsupported format {document.format!r}")
    if distribution is not None and document.distribution != distribution:
        raise CoefficientFileError(
            f"{path}: expected {distribution} coefficients, found {document.distribution}"
        )
    try:
        return document.to_surface()
    except ValueError as e:
        raise CoefficientFileError(f"{path}: inconsistent coefficients", cause=e) from e
