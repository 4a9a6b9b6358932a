"""Numba kernels: Gauss-Seidel fast sweeping and semi-Lagrangian iteration.

All kernels are serial and bitwise deterministic; arrays are modified in
place and the (residual, rounds) pair is returned.  A "round" visits every
node once per sweep ordering (2 orderings in 1D, 4 in 2D).
"""
import numba
import numpy as np

INF = 1e300


@numba.njit(cache=True)
def fsm_1d(v, ell, h, frozen, tol, max_rounds):
    """Godunov fast sweeping for |v'| = ell with frozen (Dirichlet) nodes."""
    n = v.shape[0]
    residual = INF
    rounds = 0
    while rounds < max_rounds and residual > tol:
        residual = 0.0
        for direction in range(2):
            if direction == 0:
                start, stop, step = 0, n, 1
            else:
                start, stop, step = n - 1, -1, -1
            for i in range(start, stop, step):
                if frozen[i]:
                    continue
                a = v[i - 1] if i > 0 else INF
                b = v[i + 1] if i < n - 1 else INF
                cand = min(a, b) + h * ell[i]
                if cand < v[i]:
                    change = v[i] - cand
                    if change > residual:
                        residual = change
                    v[i] = cand
        rounds += 1
    return residual, rounds


@numba.njit(cache=True)
def fsm_2d(v, ell, h, frozen, tol, max_rounds):
    """Godunov fast sweeping for |grad v| = ell on a 2D grid."""
    nx, ny = v.shape
    residual = INF
    rounds = 0
    while rounds < max_rounds and residual > tol:
        residual = 0.0
        for ordering in range(4):
            if ordering == 0:
                i0, i1, di, j0, j1, dj = 0, nx, 1, 0, ny, 1
            elif ordering == 1:
                i0, i1, di, j0, j1, dj = nx - 1, -1, -1, 0, ny, 1
            elif ordering == 2:
                i0, i1, di, j0, j1, dj = nx - 1, -1, -1, ny - 1, -1, -1
            else:
                i0, i1, di, j0, j1, dj = 0, nx, 1, ny - 1, -1, -1
            for i in range(i0, i1, di):
                for j in range(j0, j1, dj):
                    if frozen[i, j]:
                        continue
                    a = INF
                    if i > 0 and v[i - 1, j] < a:
                        a = v[i - 1, j]
                    if i < nx - 1 and v[i + 1, j] < a:
                        a = v[i + 1, j]
                    b = INF
                    if j > 0 and v[i, j - 1] < b:
                        b = v[i, j - 1]
                    if j < ny - 1 and v[i, j + 1] < b:
                        b = v[i, j + 1]
                    fh = ell[i, j] * h
                    if abs(a - b) >= fh:
                        cand = min(a, b) + fh
                    else:
                        cand = 0.5 * (a + b + np.sqrt(2.0 * fh * fh
                                                      - (a - b) * (a - b)))
                    if cand < v[i, j]:
                        change = v[i, j] - cand
                        if change > residual:
                            residual = change
                        v[i, j] = cand
        rounds += 1
    return residual, rounds


@numba.njit(cache=True)
def bellman_1d(u, f, x0, h, lam, h_a, disp, cost, tol, max_rounds):
    """Gauss-Seidel value iteration for the discounted Bellman operator.

    u(x) = min_a [ h_a*(|a|^2/2 + f(x)) + (1 - lam*h_a) * u(x + h_a*a) ]
    with foot points clamped to the grid box and multilinear interpolation.
    ``disp[c] = h_a * a_c`` and ``cost[c] = h_a * |a_c|^2 / 2``.
    """
    n = u.shape[0]
    g = 1.0 - lam * h_a
    nc = disp.shape[0]
    xmax = x0 + (n - 1) * h
    residual = INF
    rounds = 0
    while rounds < max_rounds and residual > tol:
        residual = 0.0
        for direction in range(2):
            if direction == 0:
                start, stop, step = 0, n, 1
            else:
                start, stop, step = n - 1, -1, -1
            for i in range(start, stop, step):
                x = x0 + i * h
                fterm = h_a * f[i]
                best = INF
                for c in range(nc):
                    foot = x + disp[c]
                    if foot < x0:
                        foot = x0
                    elif foot > xmax:
                        foot = xmax
                    r = (foot - x0) / h
                    j = int(r)
                    if j > n - 2:
                        j = n - 2
                    w = r - j
                    val = cost[c] + fterm + g * (u[j] * (1.0 - w)
                                                 + u[j + 1] * w)
                    if val < best:
                        best = val
                change = abs(u[i] - best)
                if change > residual:
                    residual = change
                u[i] = best
        rounds += 1
    return residual, rounds


@numba.njit(cache=True)
def bellman_2d(u, f, x0, y0, h, lam, h_a, dispx, dispy, cost, tol,
               max_rounds):
    """2D version of bellman_1d; dispx/dispy hold h_a * a per control."""
    nx, ny = u.shape
    g = 1.0 - lam * h_a
    nc = dispx.shape[0]
    xmax = x0 + (nx - 1) * h
    ymax = y0 + (ny - 1) * h
    residual = INF
    rounds = 0
    while rounds < max_rounds and residual > tol:
        residual = 0.0
        for ordering in range(4):
            if ordering == 0:
                i0, i1, di, j0, j1, dj = 0, nx, 1, 0, ny, 1
            elif ordering == 1:
                i0, i1, di, j0, j1, dj = nx - 1, -1, -1, 0, ny, 1
            elif ordering == 2:
                i0, i1, di, j0, j1, dj = nx - 1, -1, -1, ny - 1, -1, -1
            else:
                i0, i1, di, j0, j1, dj = 0, nx, 1, ny - 1, -1, -1
            for i in range(i0, i1, di):
                for j in range(j0, j1, dj):
                    x = x0 + i * h
                    y = y0 + j * h
                    fterm = h_a * f[i, j]
                    best = INF
                    for c in range(nc):
                        fx = x + dispx[c]
                        if fx < x0:
                            fx = x0
                        elif fx > xmax:
                            fx = xmax
                        fy = y + dispy[c]
                        if fy < y0:
                            fy = y0
                        elif fy > ymax:
                            fy = ymax
                        rx = (fx - x0) / h
                        ii = int(rx)
                        if ii > nx - 2:
                            ii = nx - 2
                        wx = rx - ii
                        ry = (fy - y0) / h
                        jj = int(ry)
                        if jj > ny - 2:
                            jj = ny - 2
                        wy = ry - jj
                        val = (u[ii, jj] * (1.0 - wx) * (1.0 - wy)
                               + u[ii + 1, jj] * wx * (1.0 - wy)
                               + u[ii, jj + 1] * (1.0 - wx) * wy
                               + u[ii + 1, jj + 1] * wx * wy)
                        val = cost[c] + fterm + g * val
                        if val < best:
                            best = val
                    change = abs(u[i, j] - best)
                    if change > residual:
                        residual = change
                    u[i, j] = best
        rounds += 1
    return residual, rounds
