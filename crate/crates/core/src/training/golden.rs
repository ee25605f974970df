/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// The endpoints are evaluated too, so a minimum sitting on a bound is
/// returned exactly. Returns `(x_min, f_min)`.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if a == b {
        return (a, f(a));
    }
    let (fa, fb) = (f(a), f(b));
    let (lo_x, lo_f) = (a, fa);
    let (hi_x, hi_f) = (b, fb);

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a) <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    [(x1, f1), (x2, f2), (lo_x, lo_f), (hi_x, hi_f)]
        .into_iter()
        .reduce(|best, c| if c.1 < best.1 { c } else { best })
        .expect("four candidates")
}
