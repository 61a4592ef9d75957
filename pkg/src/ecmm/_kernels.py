"""Compiled inner loop for propagating trajectory batches.

Mirrors ``dynamics._Splitting.run`` one trajectory at a time so the state
stays in cache.  Two electronic states with coupling operator sigma_z, the
spin-boson case; amplitudes are kept as four real scalars.

No fastmath: summation order must not depend on alignment, otherwise results
would not be bit-reproducible.  The mode sums use four interleaved partial
sums in a fixed order instead.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _coupling_flow(R, P, s, cos, sin_w, w_sin, c_over_w2, c_sin_w, c_vers_w2):
    """Swing every mode about its displaced centre; returns the mode part of int X dt."""
    n = R.shape[0]
    x0 = 0.0
    x1 = 0.0
    x2 = 0.0
    x3 = 0.0
    m = n - n % 4
    for j in range(0, m, 4):
        x0 += (R[j] + c_over_w2[j] * s) * c_sin_w[j] + P[j] * c_vers_w2[j]
        x1 += (R[j + 1] + c_over_w2[j + 1] * s) * c_sin_w[j + 1] + P[j + 1] * c_vers_w2[j + 1]
        x2 += (R[j + 2] + c_over_w2[j + 2] * s) * c_sin_w[j + 2] + P[j + 2] * c_vers_w2[j + 2]
        x3 += (R[j + 3] + c_over_w2[j + 3] * s) * c_sin_w[j + 3] + P[j + 3] * c_vers_w2[j + 3]
    for j in range(m, n):
        x0 += (R[j] + c_over_w2[j] * s) * c_sin_w[j] + P[j] * c_vers_w2[j]
    for j in range(n):
        shift = c_over_w2[j] * s
        dr = R[j] + shift
        p = P[j]
        R[j] = cos[j] * dr + sin_w[j] * p - shift
        P[j] = cos[j] * p - w_sin[j] * dr
    return (x0 + x1) + (x2 + x3)


@njit(cache=True, nogil=True)
def two_stage_batch(R, P, amp, n_steps, gamma, g, cos, sin_w, w_sin, c_over_w2, c_sin_w,
                    c_vers_w2, two_lambda_h, U_edge, U_inner, U_join):
    """In-place propagation of every row of (R, P, amp) by ``n_steps`` steps.

    ``g`` must be (1, -1); gamma then drops out because sigma_z is traceless.
    """
    n_traj = R.shape[0]
    e00r, e00i, e01r, e01i = U_edge[0, 0].real, U_edge[0, 0].imag, U_edge[0, 1].real, U_edge[0, 1].imag
    e10r, e10i, e11r, e11i = U_edge[1, 0].real, U_edge[1, 0].imag, U_edge[1, 1].real, U_edge[1, 1].imag
    i00r, i00i, i01r, i01i = U_inner[0, 0].real, U_inner[0, 0].imag, U_inner[0, 1].real, U_inner[0, 1].imag
    i10r, i10i, i11r, i11i = U_inner[1, 0].real, U_inner[1, 0].imag, U_inner[1, 1].real, U_inner[1, 1].imag
    j00r, j00i, j01r, j01i = U_join[0, 0].real, U_join[0, 0].imag, U_join[0, 1].real, U_join[0, 1].imag
    j10r, j10i, j11r, j11i = U_join[1, 0].real, U_join[1, 0].imag, U_join[1, 1].real, U_join[1, 1].imag
    for i in range(n_traj):
        r = R[i]
        p = P[i]
        ar, ai = amp[i, 0].real, amp[i, 0].imag
        br, bi = amp[i, 1].real, amp[i, 1].imag
        norm0 = ar * ar + ai * ai + br * br + bi * bi
        # leading H_s(a dt)
        nar = e00r * ar - e00i * ai + e01r * br - e01i * bi
        nai = e00r * ai + e00i * ar + e01r * bi + e01i * br
        nbr = e10r * ar - e10i * ai + e11r * br - e11i * bi
        nbi = e10r * ai + e10i * ar + e11r * bi + e11i * br
        ar, ai, br, bi = nar, nai, nbr, nbi
        for k in range(n_steps):
            for half in range(2):
                s = (ar * ar + ai * ai) - (br * br + bi * bi)
                x = _coupling_flow(r, p, s, cos, sin_w, w_sin, c_over_w2, c_sin_w, c_vers_w2)
                x -= two_lambda_h * s
                cx = np.cos(x)
                sx = np.sin(x)
                # a *= exp(-i x), b *= exp(+i x)
                ar, ai = ar * cx + ai * sx, ai * cx - ar * sx
                br, bi = br * cx - bi * sx, bi * cx + br * sx
                if half == 0:
                    u00r, u00i, u01r, u01i = i00r, i00i, i01r, i01i
                    u10r, u10i, u11r, u11i = i10r, i10i, i11r, i11i
                elif k < n_steps - 1:
                    u00r, u00i, u01r, u01i = j00r, j00i, j01r, j01i
                    u10r, u10i, u11r, u11i = j10r, j10i, j11r, j11i
                else:
                    u00r, u00i, u01r, u01i = e00r, e00i, e01r, e01i
                    u10r, u10i, u11r, u11i = e10r, e10i, e11r, e11i
                nar = u00r * ar - u00i * ai + u01r * br - u01i * bi
                nai = u00r * ai + u00i * ar + u01r * bi + u01i * br
                nbr = u10r * ar - u10i * ai + u11r * br - u11i * bi
                nbi = u10r * ai + u10i * ar + u11r * bi + u11i * br
                ar, ai, br, bi = nar, nai, nbr, nbi
            # the stored unitaries are unitary only to ~1 ulp; without this
            # the round-off bias grows linearly with the number of steps
            norm = ar * ar + ai * ai + br * br + bi * bi
            if norm > 0.0:
                f = np.sqrt(norm0 / norm)
                ar *= f
                ai *= f
                br *= f
                bi *= f
        amp[i, 0] = complex(ar, ai)
        amp[i, 1] = complex(br, bi)
