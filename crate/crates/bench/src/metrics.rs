//! Scalar measures of profiles and convergence histories.

use crate::profile::InterfaceProfile;

/// Oscillation of a sequence: total variation in excess of the variation a
/// monotone sequence spanning the same range would have, normalized by the
/// largest value. Zero for monotone data, and for fewer than three values.
pub fn oscillation(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let tv: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    ((tv - (max - min)) / scale).max(0.0)
}

/// [`oscillation`] of a field over the contacting samples, in profile order.
pub fn profile_oscillation(profile: &InterfaceProfile, field: impl Fn(&crate::profile::ProfileSample) -> f64) -> f64 {
    let values: Vec<f64> = profile.samples.iter().filter(|p| p.contact).map(field).collect();
    oscillation(&values)
}

/// Linear interpolation of sorted samples `(s, f)` at `x`; clamps outside.
pub fn interpolate(s: &[f64], f: &[f64], x: f64) -> f64 {
    match s.iter().position(|&v| v >= x) {
        None => *f.last().unwrap_or(&0.0),
        Some(0) => f[0],
        Some(i) => {
            let (s0, s1) = (s[i - 1], s[i]);
            if s1 == s0 {
                f[i]
            } else {
                f[i - 1] + (f[i] - f[i - 1]) * (x - s0) / (s1 - s0)
            }
        }
    }
}

/// Number of points of the common grid used by [`l2_difference`].
pub const RESAMPLE_POINTS: usize = 2001;

/// L2 norm of the difference of two sampled profiles, both resampled by
/// linear interpolation onto a uniform grid over their common range.
pub fn l2_difference(s_a: &[f64], f_a: &[f64], s_b: &[f64], f_b: &[f64]) -> f64 {
    if s_a.is_empty() || s_b.is_empty() {
        return 0.0;
    }
    let lo = s_a[0].max(s_b[0]);
    let hi = s_a[s_a.len() - 1].min(s_b[s_b.len() - 1]);
    if !(hi > lo) {
        return 0.0;
    }
    let n = RESAMPLE_POINTS;
    let ds = (hi - lo) / (n - 1) as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let x = lo + ds * k as f64;
        let d = interpolate(s_a, f_a, x) - interpolate(s_b, f_b, x);
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        sum += w * d * d * ds;
    }
    sum.sqrt()
}

/// Observed convergence order from the last three residual norms,
/// `log(r₃/r₂) / log(r₂/r₁)`. `None` with fewer than three norms or a
/// non-decreasing pair.
pub fn tail_order(norms: &[f64]) -> Option<f64> {
    let [r1, r2, r3] = norms.get(norms.len().checked_sub(3)?..)? else {
        return None;
    };
    if !(r1 > r2 && *r2 > 0.0 && *r3 > 0.0) {
        return None;
    }
    Some((r3 / r2).ln() / (r2 / r1).ln())
}

/// [`tail_order`] of the norms above the round-off level `floor`. Norms at
/// or below it measure rounding, not convergence.
pub fn tail_order_above(norms: &[f64], floor: f64) -> Option<f64> {
    let end = norms.iter().rposition(|&r| r > floor)? + 1;
    tail_order(&norms[..end])
}

/// Boundary of the contact zone on a circle, in degrees from the
/// horizontal axis. Samples are folded into the first quadrant and the
/// threshold θ_c minimizing the number of samples misclassified by "contact
/// iff θ > θ_c" is returned (midpoint between neighbours; the middle of the
/// best range on ties).
pub fn separation_angle(profile: &InterfaceProfile) -> Option<f64> {
    let mut pts: Vec<(f64, bool)> = profile
        .samples
        .iter()
        .map(|p| (p.y.abs().atan2(p.x.abs()).to_degrees(), p.contact))
        .collect();
    if pts.is_empty() {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // threshold index i: samples [0, i) predicted open, [i, n) contact
    let contact_total = pts.iter().filter(|p| p.1).count();
    let mut contact_below = 0;
    let mut best = (usize::MAX, Vec::new());
    for i in 0..=pts.len() {
        let errors = contact_below + (pts.len() - i - (contact_total - contact_below));
        if errors < best.0 {
            best = (errors, vec![i]);
        } else if errors == best.0 {
            best.1.push(i);
        }
        if i < pts.len() {
            if pts[i].1 {
                contact_below += 1;
            }
        }
    }
    let i = best.1[best.1.len() / 2];
    let angle = match i {
        0 => 0.0,
        i if i == pts.len() => 90.0,
        i => 0.5 * (pts[i - 1].0 + pts[i].0),
    };
    Some(angle)
}

/// Whether every value is strictly smaller than its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// `max |a − b| / max |a|`.
pub fn max_relative_difference(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileSample;

    #[test]
    fn oscillation_examples() {
        assert_eq!(oscillation(&[3.0; 6]), 0.0);
        assert_eq!(oscillation(&[1.0, 2.0, 2.5, 4.0]), 0.0);
        assert_eq!(oscillation(&[4.0, 3.0, 1.0]), 0.0);
        assert!((oscillation(&[1.0, 2.0, 1.0, 2.0, 1.0]) - 1.5).abs() < 1e-15);
        assert_eq!(oscillation(&[1.0, 5.0]), 0.0);
        assert_eq!(oscillation(&[]), 0.0);
    }

    #[test]
    fn l2_of_identical_is_zero() {
        let s = [0.0, 0.3, 1.0];
        let f = [1.0, 2.0, -1.0];
        assert_eq!(l2_difference(&s, &f, &s, &f), 0.0);
        // constant offset 1 over [0, 1]
        let g = [2.0, 3.0, 0.0];
        assert!((l2_difference(&s, &f, &s, &g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_clamps() {
        let s = [0.0, 1.0];
        let f = [0.0, 2.0];
        assert_eq!(interpolate(&s, &f, 0.25), 0.5);
        assert_eq!(interpolate(&s, &f, -1.0), 0.0);
        assert_eq!(interpolate(&s, &f, 3.0), 2.0);
    }

    #[test]
    fn tail_orders() {
        let quad = [1e-1, 1e-2, 1e-4, 1e-8];
        assert!((tail_order(&quad).unwrap() - 2.0).abs() < 1e-12);
        let lin = [1.0, 0.5, 0.25];
        assert!((tail_order(&lin).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(tail_order(&[1.0, 0.1]), None);
        assert_eq!(tail_order(&[1.0, 1.0, 0.1]), None);
        // last norm stagnates at the round-off level
        let floored = [1e2, 1e1, 1e-1, 1e-5, 3e-6];
        assert!(tail_order(&floored).unwrap() < 1.0);
        assert!((tail_order_above(&floored, 1e-5).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(tail_order_above(&floored, 1e3), None);
    }

    #[test]
    fn separation_of_clean_split() {
        let samples = (0..360)
            .map(|k| {
                let th = (k as f64 + 0.5).to_radians();
                let folded = th.sin().abs().atan2(th.cos().abs()).to_degrees();
                ProfileSample {
                    s: k as f64 + 0.5,
                    x: th.cos(),
                    y: th.sin(),
                    weight: 1.0,
                    u_n: 0.0,
                    u_t: 0.0,
                    p_n: 0.0,
                    tau: 0.0,
                    contact: folded > 55.0,
                }
            })
            .collect();
        let a = separation_angle(&InterfaceProfile { samples }).unwrap();
        assert!((a - 55.0).abs() < 0.51, "{a}");
    }

    #[test]
    fn decreasing_and_relative() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        assert_eq!(max_relative_difference(&[2.0, -4.0], &[2.0, -3.0]), 0.25);
    }
}
