import numpy as np


def saturate(u_raw) -> np.ndarray:
    """sat(u) = 9 sin(u)/8 + sin(3u)/8, Wertebereich [-1, 1]."""
    u_raw = np.asarray(u_raw, dtype=float)
    return (9.0 * np.sin(u_raw) + np.sin(3.0 * u_raw)) / 8.0


def saturate_grad(u_raw) -> np.ndarray:
    u_raw = np.asarray(u_raw, dtype=float)
    return (9.0 * np.cos(u_raw) + 3.0 * np.cos(3.0 * u_raw)) / 8.0
