"""Input/output: coefficient files and CSV tables."""

from pathgrad.io.coefficients import CoefficientFile, read_coefficient_file, write_coefficient_file
from pathgrad.io.csv_writer import config_hash, read_table, render_table, write_table

__all__ = [
    "CoefficientFile",
    "read_coefficient_file",
    "write_coefficient_file",
    "config_hash",
    "render_table",
    "write_table",
    "read_table",
]
