# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled batch evaluator for truncated-power term sums.

One network evaluation is sum_i c_i * max(0, s_i*(x - t_i))**k over all
terms, repeated for every grid point; this inner loop dominates the
runtime of every error oracle and norm sweep, hence the compiled kernel.
Accumulation is Kahan-compensated per point: the alternating binomial
coefficients of the compactly supported constructions cancel heavily and
a naive running sum loses digits.
"""


def eval_batch(double[::1] xs, double[::1] coeffs, double[::1] signs,
               double[::1] knots, int k, double[::1] out):
    """Fill ``out`` with the term-sum value at each point of ``xs``.

    ``signs`` holds +1.0/-1.0 per term.  ``out`` must have the same
    length as ``xs``.
    """
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = coeffs.shape[0]
    cdef Py_ssize_t i, j, p
    cdef double x, d, pw, contrib
    cdef double acc, comp, y, t

    if out.shape[0] != n or signs.shape[0] != m or knots.shape[0] != m:
        raise ValueError("mismatched array lengths")
    if k < 1:
        raise ValueError("order must be >= 1")

    with nogil:
        for i in range(n):
            x = xs[i]
            acc = 0.0
            comp = 0.0
            for j in range(m):
                d = signs[j] * (x - knots[j])
                if d > 0.0:
                    pw = d
                    for p in range(k - 1):
                        pw *= d
                    contrib = coeffs[j] * pw
                    # Kahan step
                    y = contrib - comp
                    t = acc + y
                    comp = (t - acc) - y
                    acc = t
            out[i] = acc
    return None
