"""Compiled single-trajectory loop used by ``run_ensemble``.

The loop tracks only the two radical-pair amplitudes (a = <S|psi>,
b = <T|psi>); product states never evolve once reached, so terminal
events simply end the trajectory. Branch order and probabilities must
stay in lockstep with the pure-Python ``step_*`` functions.
"""

import numba as nb
import numpy as np

# scheme codes
TRADITIONAL = 0
JONES_HORE = 1
KOMINIS = 2

# event codes (mirrors trajectories.Event)
NO_JUMP = 0
SINGLET_PRODUCT = 1
TRIPLET_PRODUCT = 2
PROJECT_S = 3
PROJECT_T = 4
KOMINIS_REMOVE = 5


@nb.njit(nogil=True, cache=True)
def _record(acc_rho, acc_pop2, r, a, b):
    pa = a.real * a.real + a.imag * a.imag
    pb = b.real * b.real + b.imag * b.imag
    acc_rho[r, 0, 0] += pa
    acc_rho[r, 1, 1] += pb
    ab = a * np.conj(b)
    acc_rho[r, 0, 1] += ab
    acc_rho[r, 1, 0] += np.conj(ab)
    acc_pop2[r, 0] += pa * pa
    acc_pop2[r, 1] += pb * pb


@nb.njit(nogil=True, cache=True)
def run_trajectory(scheme, a, b, U, kS, kT, dt, n_steps, record_every, gen, acc_rho, acc_pop2, counts):
    """Advance one trajectory; returns (terminal event, step, pre-event <Q_S>).

    ``counts`` accumulates [ProjectS, ProjectT] measurement events.
    Step is -1 when the trajectory survives to the end.
    """
    _record(acc_rho, acc_pop2, 0, a, b)
    for n in range(1, n_steps + 1):
        u = gen.random()
        ps = a.real * a.real + a.imag * a.imag
        pt = b.real * b.real + b.imag * b.imag
        event = NO_JUMP
        if scheme == TRADITIONAL:
            c = 1.0 - kS * ps * dt - kT * pt * dt
            if u >= c:
                c += kS * ps * dt
                if u < c:
                    event = SINGLET_PRODUCT
                else:
                    c += kT * pt * dt
                    if u < c:
                        event = TRIPLET_PRODUCT
        elif scheme == JONES_HORE:
            c = 1.0 - kS * dt - kT * dt
            if u >= c:
                c += kS * ps * dt
                if u < c:
                    event = SINGLET_PRODUCT
                else:
                    c += kS * pt * dt
                    if u < c:
                        event = PROJECT_T
                    else:
                        c += kT * pt * dt
                        if u < c:
                            event = TRIPLET_PRODUCT
                        else:
                            c += kT * ps * dt
                            if u < c:
                                event = PROJECT_S
        else:
            pr = kS * ps * dt
            c = pr
            if u < c:
                event = KOMINIS_REMOVE
            else:
                c += (1.0 - pr) * 0.5 * kS * ps * dt
                if u < c:
                    event = PROJECT_S
                else:
                    c += (1.0 - pr) * 0.5 * kS * pt * dt
                    if u < c:
                        event = PROJECT_T

        if event == SINGLET_PRODUCT or event == TRIPLET_PRODUCT or event == KOMINIS_REMOVE:
            return event, n, ps
        if event == PROJECT_S:
            a = a / np.sqrt(ps)
            b = 0.0j
            counts[0] += 1
        elif event == PROJECT_T:
            a = 0.0j
            b = b / np.sqrt(pt)
            counts[1] += 1
        else:
            a2 = U[0, 0] * a + U[0, 1] * b
            b2 = U[1, 0] * a + U[1, 1] * b
            norm = np.sqrt(a2.real * a2.real + a2.imag * a2.imag + b2.real * b2.real + b2.imag * b2.imag)
            a = a2 / norm
            b = b2 / norm
        if n % record_every == 0:
            _record(acc_rho, acc_pop2, n // record_every, a, b)
    return NO_JUMP, -1, 0.0
