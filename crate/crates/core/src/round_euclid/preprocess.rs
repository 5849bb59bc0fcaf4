use crate::error::Result;
use crate::instance::MetricInstance;
use crate::relax::FractionalSolution;
use crate::round_metric::trace::{TraceEvent, Tracer};
use crate::round_metric::{absorb, check_preprocessed, first_overloaded, is_light};

use super::grid::{bucket, dimension_scale};
use super::{common_radius, EuclidParams};

/// Index of the top radius class for `epsilon`: `max(0, ceil(log2(1/eps)))`.
pub fn top_class(epsilon: f64) -> usize {
    (1.0 / epsilon).log2().ceil().max(0.0) as usize
}

/// Class of a ball of radius `rho` among balls of largest radius `r`:
/// class `i` holds `[2^(i-1) r eps, 2^i r eps)`, the top class also `r` itself.
pub fn radius_class(rho: f64, r: f64, epsilon: f64) -> usize {
    let top = top_class(epsilon);
    (0..top)
        .find(|&i| rho < 2f64.powi(i as i32) * r * epsilon)
        .unwrap_or(top)
}

/// Replaces each overloaded group of light balls by one fully opened ball
/// per grid cell and radius class, served at `1 + eps` times its radius.
pub(crate) fn preprocess_traced(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &EuclidParams,
    tracer: &mut Tracer,
) -> Result<FractionalSolution> {
    let (alpha, tol, eps) = (params.alpha, params.tol, params.epsilon);
    let scale = dimension_scale(inst.dimension().unwrap_or(1));
    let unit = common_radius(inst);
    let order = inst.tie_break_order();
    let mut out = frac.clone();
    while let Some(j) = first_overloaded(&out, alpha, tol) {
        let servers: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| out.x.serves(i, j) && is_light(out.y[i], alpha, tol))
            .collect();
        let mut members = Vec::new();
        let mut total = 0.0;
        for i in servers {
            members.push(i);
            total += out.y[i];
            if total > alpha + tol {
                break;
            }
        }
        let biggest = members[0];
        let r = inst.balls[biggest].radius;
        let mut moves = Vec::new();
        let mut groups = Vec::new();
        if unit.is_some() {
            groups = bucket(inst, &members, 4.0 * r, eps * r / 4.0 * scale)?;
        } else {
            let mut classes: Vec<Vec<usize>> = vec![Vec::new(); top_class(eps) + 1];
            for &i in &members {
                let rho = inst.balls[i].radius;
                if i != biggest && rho < r * eps / 2.0 {
                    absorb(&mut out, i, biggest, &mut moves);
                    out.y[i] = 0.0;
                } else {
                    classes[radius_class(rho, r, eps)].push(i);
                }
            }
            for (i, class) in classes.iter().enumerate() {
                let unit_len = 2f64.powi(i as i32) * r * eps;
                groups.extend(bucket(inst, class, 4.0 * unit_len, unit_len * eps / 4.0 * scale)?);
            }
        }
        let mut receivers = Vec::with_capacity(groups.len());
        for group in &groups {
            let rep = group[0];
            for &other in &group[1..] {
                absorb(&mut out, other, rep, &mut moves);
                out.y[other] = 0.0;
            }
            out.y[rep] = 1.0;
            out.stage_slack[rep] = 1.0 + eps;
            receivers.push(rep);
        }
        tracer.record(TraceEvent::Merge {
            point: j,
            members,
            receivers,
            moves,
        })?;
    }
    for y in out.y.iter_mut() {
        if *y > alpha + tol {
            *y = 1.0;
        }
    }
    let factor = params.preprocess_constant(inst.dimension().unwrap_or(1)) / alpha;
    check_preprocessed(inst, frac, &out, alpha, tol, factor)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        assert_eq!(top_class(1.0), 0);
        assert_eq!(top_class(0.5), 1);
        assert_eq!(top_class(0.3), 2);
        assert_eq!(top_class(4.0), 0);
        // eps = 1/4, r = 1: [1/8, 1/4), [1/4, 1/2), [1/2, 1].
        assert_eq!(radius_class(0.125, 1.0, 0.25), 0);
        assert_eq!(radius_class(0.3, 1.0, 0.25), 1);
        assert_eq!(radius_class(0.5, 1.0, 0.25), 2);
        assert_eq!(radius_class(1.0, 1.0, 0.25), 2);
    }
}
