"""NumPy implementations of the density-matrix superoperator kernels.

Qubit k of an n-qubit register is bit (n - 1 - k) of the basis index. A
superoperator ``S`` on qubits ``qs`` is indexed ``S[i*D + j, k*D + l]``
(``D = 2**len(qs)``) and maps rho_sub[k, l] to rho_sub[i, j].
"""

import numpy as np


def apply_superop_1q(rho, superop, q, n):
    t = np.asarray(superop).reshape(2, 2, 2, 2)
    r = rho.reshape((2,) * (2 * n))
    out = np.tensordot(t, r, axes=([2, 3], [q, n + q]))
    out = np.moveaxis(out, (0, 1), (q, n + q))
    return np.ascontiguousarray(out).reshape(rho.shape)


def apply_superop_2q(rho, superop, q0, q1, n):
    t = np.asarray(superop).reshape((2,) * 8)
    r = rho.reshape((2,) * (2 * n))
    out = np.tensordot(t, r, axes=([4, 5, 6, 7], [q0, q1, n + q0, n + q1]))
    out = np.moveaxis(out, (0, 1, 2, 3), (q0, q1, n + q0, n + q1))
    return np.ascontiguousarray(out).reshape(rho.shape)
