"""
Attenuated X-ray transform of tensor fields on the unit disc: simulation, gauge representatives
and reconstruction in fan-beam coordinates.
"""
from .discretization import Discretization
from .fields import BoundaryField, BoundaryGrid, DiscField, FiberField, PolarGrid
from .gauge import GaugeRepresentative, gauge_reduce, gauge_reduce_truncated, lemma_decomp, stability_check
from .reconstruction import (
    doppler_recon,
    fbp_unattenuated,
    peel_cascade,
    recon_bulk,
    recon_full,
    recon_residual,
)
from .special_solutions import hif_build, holomorphize, invariant_from_function, special_primitive
from .transport import Sinogram, backproject, transport_solve, xray, xray_attenuated, xray_perp

__all__ = [
    "Discretization",
    "BoundaryField",
    "BoundaryGrid",
    "DiscField",
    "FiberField",
    "PolarGrid",
    "GaugeRepresentative",
    "gauge_reduce",
    "gauge_reduce_truncated",
    "lemma_decomp",
    "stability_check",
    "doppler_recon",
    "fbp_unattenuated",
    "peel_cascade",
    "recon_bulk",
    "recon_full",
    "recon_residual",
    "hif_build",
    "holomorphize",
    "invariant_from_function",
    "special_primitive",
    "Sinogram",
    "backproject",
    "transport_solve",
    "xray",
    "xray_attenuated",
    "xray_perp",
]
