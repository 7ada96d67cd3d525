"""Rigid-body dynamics of the first three links of a Puma 560 arm.

Vectorized recursive Newton-Euler over standard Denavit-Hartenberg frames,
with the usual published link parameters (masses, first moments, diagonal
link inertias). Joints are frictionless and motor inertia is ignored, so
torque decomposes exactly as tau = A(q) qdd + n(q, qd) + g(q).
"""

import numpy as np

__all__ = [
    "rne",
    "inertia_matrix",
    "coriolis_torque",
    "gravity_torque",
    "link1_acceleration",
]

N_LINKS = 3
GRAVITY_ACCEL = 9.81

# Standard-DH constants per link: twist alpha, link length a, offset d.
_ALPHA = np.array([np.pi / 2, 0.0, -np.pi / 2])
_A = np.array([0.0, 0.4318, 0.0203])
_D = np.array([0.0, 0.0, 0.15005])
_MASS = np.array([0.0, 17.4, 4.8])
# Centre of mass in the link frame.
_COM = np.array([
    [0.0, 0.0, 0.0],
    [-0.3638, 0.006, 0.2275],
    [-0.0203, -0.0141, 0.070],
])
# Diagonal link inertia about the centre of mass.
_INERTIA = np.array([
    [0.0, 0.35, 0.0],
    [0.13, 0.524, 0.539],
    [0.066, 0.086, 0.0125],
])
# Displacement of frame j expressed in frame j: [a, d sin(alpha), d cos(alpha)].
_PSTAR = np.stack([_A, _D * np.sin(_ALPHA), _D * np.cos(_ALPHA)], axis=1)


def _as_batch(arr):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != N_LINKS:
        raise ValueError(f"expected shape (n, {N_LINKS}), got {arr.shape}")
    return arr


def _rotation(qj, alpha):
    """Rotation of frame j relative to frame j-1 for joint angle qj, (n,3,3)."""
    c, s = np.cos(qj), np.sin(qj)
    ca, sa = np.cos(alpha), np.sin(alpha)
    n = qj.shape[0]
    R = np.empty((n, 3, 3))
    R[:, 0, 0] = c
    R[:, 0, 1] = -s * ca
    R[:, 0, 2] = s * sa
    R[:, 1, 0] = s
    R[:, 1, 1] = c * ca
    R[:, 1, 2] = -c * sa
    R[:, 2, 0] = 0.0
    R[:, 2, 1] = sa
    R[:, 2, 2] = ca
    return R


def _matvec(M, v):
    return np.einsum("nij,nj->ni", M, v)


def rne(q, qd, qdd, gravity=True):
    """Joint torques for the given motion state, shape (n, 3).

    Forward pass propagates angular velocity/acceleration and linear
    acceleration link by link; backward pass accumulates forces and moments.
    Gravity enters as an upward base acceleration.
    """
    q, qd, qdd = _as_batch(q), _as_batch(qd), _as_batch(qdd)
    n = q.shape[0]
    z0 = np.array([0.0, 0.0, 1.0])

    R = [_rotation(q[:, j], _ALPHA[j]) for j in range(N_LINKS)]
    w = np.zeros((n, 3))
    wd = np.zeros((n, 3))
    vd = np.zeros((n, 3))
    if gravity:
        vd[:, 2] = GRAVITY_ACCEL

    F, Nm = [], []
    for j in range(N_LINKS):
        Rt = R[j].transpose(0, 2, 1)
        pstar = _PSTAR[j]
        qd_j = qd[:, j, None]
        qdd_j = qdd[:, j, None]
        wd = _matvec(Rt, wd + z0 * qdd_j + np.cross(w, z0 * qd_j))
        w = _matvec(Rt, w + z0 * qd_j)
        vd = np.cross(wd, pstar) + np.cross(w, np.cross(w, pstar)) + _matvec(Rt, vd)
        acc_com = np.cross(wd, _COM[j]) + np.cross(w, np.cross(w, _COM[j])) + vd
        F.append(_MASS[j] * acc_com)
        Nm.append(_INERTIA[j] * wd + np.cross(w, _INERTIA[j] * w))

    tau = np.empty((n, N_LINKS))
    f = np.zeros((n, 3))
    nn = np.zeros((n, 3))
    eye = np.broadcast_to(np.eye(3), (n, 3, 3))
    for j in range(N_LINKS - 1, -1, -1):
        Rnext = R[j + 1] if j < N_LINKS - 1 else eye
        pstar = np.broadcast_to(_PSTAR[j], (n, 3))
        nn = (
            _matvec(Rnext, nn + np.cross(_matvec(Rnext.transpose(0, 2, 1), pstar), f))
            + np.cross(pstar + _COM[j], F[j])
            + Nm[j]
        )
        f = _matvec(Rnext, f) + F[j]
        axis = R[j][:, 2, :]  # joint axis z0 of frame j-1 expressed in frame j
        tau[:, j] = np.einsum("ni,ni->n", nn, axis)
    return tau


def gravity_torque(q):
    q = _as_batch(q)
    zeros = np.zeros_like(q)
    return rne(q, zeros, zeros, gravity=True)


def coriolis_torque(q, qd):
    q = _as_batch(q)
    return rne(q, qd, np.zeros_like(q), gravity=False)


def inertia_matrix(q):
    """Joint-space inertia A(q), shape (n, 3, 3), via unit-acceleration probes."""
    q = _as_batch(q)
    zeros = np.zeros_like(q)
    cols = []
    for k in range(N_LINKS):
        unit = np.zeros_like(q)
        unit[:, k] = 1.0
        cols.append(rne(q, zeros, unit, gravity=False))
    return np.stack(cols, axis=-1)


def link1_acceleration(q, qd, tau):
    """Angular acceleration of the first link given torques: solve the
    equations of motion for qdd and take component 1."""
    q, qd, tau = _as_batch(q), _as_batch(qd), _as_batch(tau)
    A = inertia_matrix(q)
    rhs = tau - coriolis_torque(q, qd) - gravity_torque(q)
    qdd = np.linalg.solve(A, rhs[:, :, None])[:, :, 0]
    return qdd[:, 0]
