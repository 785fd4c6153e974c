"""Pure-Python fallback for the compiled sequential reductions."""
import numpy as np


def ordered_product(factors):
    """Return ``factors[N-1] @ ... @ factors[0]`` (identity for ``N == 0``)."""
    factors = np.asarray(factors, dtype=np.complex128)
    acc = np.eye(factors.shape[1], dtype=np.complex128)
    for f in factors:
        acc = f @ acc
    return acc


def ordered_partials(factors):
    """Return all partial products; entry ``j`` is ``factors[j-1] @ ... @ factors[0]``."""
    factors = np.asarray(factors, dtype=np.complex128)
    out = np.empty((factors.shape[0] + 1,) + factors.shape[1:], dtype=np.complex128)
    out[0] = np.eye(factors.shape[1])
    for j, f in enumerate(factors):
        out[j + 1] = f @ out[j]
    return out


def propagate(props, psi0, keep_all=True):
    """Apply ``props`` in order to the column block ``psi0``."""
    props = np.asarray(props, dtype=np.complex128)
    psi = np.array(psi0, dtype=np.complex128)
    if keep_all:
        out = np.empty((props.shape[0] + 1,) + psi.shape, dtype=np.complex128)
        out[0] = psi
        for j, u in enumerate(props):
            out[j + 1] = u @ out[j]
        return out
    for u in props:
        psi = u @ psi
    return psi
