"""One Metropolis sweep over the per-location log densities.

Conditional on the regression parameters the log densities are independent,
so each location gets its own random-walk proposal and accept test. Normal
draws ``z`` and log-uniforms ``logu`` come from the caller's generator, which
keeps the two backends on the same random stream.
"""
import numpy as np

from .._accel import njit


@njit
def sweep_loops(u, N, A, mu, inv_var, step, z, logu, accepted):
    n = u.shape[0]
    count = 0
    for i in range(n):
        cur = u[i]
        prop = cur + step[i] * z[i]
        dc = cur - mu[i]
        dp = prop - mu[i]
        delta = (
            N[i] * (prop - cur)
            - A[i] * (np.exp(prop) - np.exp(cur))
            - 0.5 * inv_var[i] * (dp * dp - dc * dc)
        )
        if logu[i] < delta:
            u[i] = prop
            accepted[i] = True
            count += 1
        else:
            accepted[i] = False
    return count


def sweep_vector(u, N, A, mu, inv_var, step, z, logu, accepted):
    prop = u + step * z
    dc = u - mu
    dp = prop - mu
    with np.errstate(over="ignore", invalid="ignore"):
        delta = N * (prop - u) - A * (np.exp(prop) - np.exp(u)) - 0.5 * inv_var * (dp * dp - dc * dc)
    acc = logu < delta
    u[acc] = prop[acc]
    accepted[:] = acc
    return int(np.count_nonzero(acc))
