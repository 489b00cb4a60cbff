// Safeguarded Newton iteration for a strictly decreasing scalar function.

/// Outcome of [`solve_decreasing`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub point: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds `t` in `[lo, hi]` with `f(t) = 0` where `f` is decreasing,
/// `f(lo) >= 0 >= f(hi)`. `eval` returns `(f(t), f'(t))`.
///
/// Newton steps that leave the current bracket (or have a useless
/// derivative) fall back to bisection. Stops once `|f| <= value_tol` or the
/// step falls below `step_tol`.
pub(crate) fn solve_decreasing<F>(
    mut eval: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    value_tol: f64,
    step_tol: f64,
    max_iterations: usize,
) -> Root
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut t = start.clamp(lo, hi);
    let mut best = Root { point: t, value: f64::INFINITY, iterations: 0, converged: false };
    for it in 1..=max_iterations {
        let (value, slope) = eval(t);
        if libm::fabs(value) < libm::fabs(best.value) {
            best = Root { point: t, value, iterations: it, converged: false };
        }
        if libm::fabs(value) <= value_tol {
            return Root { point: t, value, iterations: it, converged: true };
        }
        if value > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = if slope < 0.0 && slope.is_finite() { t - value / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = libm::fabs(next - t);
        t = next;
        if step <= step_tol * (1.0 + libm::fabs(t)) || hi - lo <= step_tol * (1.0 + libm::fabs(t)) {
            let (value, _) = eval(t);
            let better = if libm::fabs(value) < libm::fabs(best.value) {
                Root { point: t, value, iterations: it, converged: true }
            } else {
                Root { converged: true, ..best }
            };
            return better;
        }
    }
    best.iterations = max_iterations;
    best
}
