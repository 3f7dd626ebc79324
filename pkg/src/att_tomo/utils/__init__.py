from .conversions import resample_periodic, wrap_angle, wrap_signed

__all__ = ["resample_periodic", "wrap_angle", "wrap_signed"]
