"""
Increment projection tensors: identity, longitudinal (along the separation
direction), and transverse (orthogonal complement).
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class TensorKind(Enum):
    I = "I"
    L = "L"
    T = "T"


def _unit(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    norm = np.sqrt(np.sum(y**2, axis=-1, keepdims=True))
    if np.any(norm == 0.0):
        raise ValueError("projection direction must be nonzero")
    return y / norm


def apply_tensor(kind: TensorKind, y, v) -> np.ndarray:
    """
    Apply T_kind(y) to vectors v.  Both arguments broadcast over leading axes;
    the last axis is the vector index.
    """
    v = np.asarray(v, dtype=np.float64)
    if kind is TensorKind.I:
        return v.copy()
    yhat = _unit(y)
    along = np.sum(v * yhat, axis=-1, keepdims=True) * yhat
    if kind is TensorKind.L:
        return along
    return v - along


def tensor_matrix(kind: TensorKind, y) -> np.ndarray:
    """Matrix of T_kind(y); shape (..., d, d)."""
    yhat = _unit(y)
    d = yhat.shape[-1]
    eye = np.eye(d)
    outer = yhat[..., :, np.newaxis] * yhat[..., np.newaxis, :]
    if kind is TensorKind.I:
        return np.broadcast_to(eye, outer.shape).copy()
    if kind is TensorKind.L:
        return outer
    return eye - outer


def projection_constant(kind: TensorKind, d: int) -> float:
    """
    Normalization constant multiplying the space/sphere-averaged third-order
    increment integrand in the structure function for each projection.
    """
    if kind is TensorKind.I:
        return d / 4.0
    if kind is TensorKind.L:
        return d * (d + 2) / 12.0
    return d * (d + 2) / (4.0 * (d - 1))
