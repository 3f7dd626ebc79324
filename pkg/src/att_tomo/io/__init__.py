"""
Array files and object persistence.
"""
from .atf_io import export_csv, load_csv, read_atf, write_atf
from .store import (
    load_disc_field,
    load_representative,
    load_sinogram,
    save_disc_field,
    save_representative,
    save_sinogram,
)

__all__ = [
    "export_csv",
    "load_csv",
    "read_atf",
    "write_atf",
    "load_disc_field",
    "load_representative",
    "load_sinogram",
    "save_disc_field",
    "save_representative",
    "save_sinogram",
]
