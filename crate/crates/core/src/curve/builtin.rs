use super::{CurveError, KnotCurve};

/// The trefoil `(sin t + 2 sin 2t, cos t − 2 cos 2t, −sin 3t)`.
pub const PAPER_TREFOIL_SOURCE: &str = "(sin(t) + 2*sin(2*t), cos(t) - 2*cos(2*t), -sin(3*t))";

pub const BUILTIN_NAMES: [&str; 3] = ["paper_trefoil", "circle", "torus_knot"];

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Looks up a built-in knot family.
///
/// * `paper_trefoil` takes no parameters.
/// * `circle` takes `[radius]` (default `[1]`).
/// * `torus_knot` takes `[p, q, R, r]` and yields
///   `((R + r cos qt) cos pt, (R + r cos qt) sin pt, r sin qt)`; `R` and `r`
///   default to 2 and 1.
pub fn builtin(name: &str, params: &[f64]) -> Result<KnotCurve, CurveError> {
    let invalid = |reason: String| CurveError::InvalidParams {
        name: name.to_string(),
        reason,
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(invalid("parameters must be finite".into()));
    }
    match name {
        "paper_trefoil" => {
            if !params.is_empty() {
                return Err(invalid(format!("expected no parameters, got {}", params.len())));
            }
            KnotCurve::parse(PAPER_TREFOIL_SOURCE)
        }
        "circle" => {
            let radius = match params {
                [] => 1.0,
                [r] => *r,
                _ => return Err(invalid(format!("expected [radius], got {} values", params.len()))),
            };
            if radius <= 0.0 {
                return Err(invalid(format!("radius must be positive, got {radius}")));
            }
            KnotCurve::parse(&format!("({radius}*cos(t), {radius}*sin(t), 0)"))
        }
        "torus_knot" => {
            let (p, q, big, small) = match params {
                [p, q] => (*p, *q, 2.0, 1.0),
                [p, q, big, small] => (*p, *q, *big, *small),
                _ => {
                    return Err(invalid(format!(
                        "expected [p, q] or [p, q, R, r], got {} values",
                        params.len()
                    )))
                }
            };
            if p.fract() != 0.0 || q.fract() != 0.0 || p < 1.0 || q < 1.0 {
                return Err(invalid(format!("p and q must be positive integers, got {p}, {q}")));
            }
            if !(big > small && small > 0.0) {
                return Err(invalid(format!("need R > r > 0, got R = {big}, r = {small}")));
            }
            let g = gcd(p as u64, q as u64);
            if g != 1 {
                log::warn!("torus_knot({p}, {q}): gcd is {g}, the curve retraces a ({}, {}) knot", p / g as f64, q / g as f64);
            }
            KnotCurve::parse(&format!(
                "(({big} + {small}*cos({q}*t))*cos({p}*t), ({big} + {small}*cos({q}*t))*sin({p}*t), {small}*sin({q}*t))"
            ))
        }
        other => Err(CurveError::UnknownBuiltin(other.to_string())),
    }
}
