//! Hyperbolic positioning from TDoA measurements.
//!
//! Each measurement constrains the tag to one sheet of a hyperbola with the
//! two anchors as foci. The solver minimizes the weighted squared residual
//! `sum_i w_i * (|p - a_i| - |p - b_i| - c * td_i)^2` with damped
//! Gauss-Newton (Levenberg-style lambda schedule). A closed-form start
//! would only cover the exactly-determined case; the iterative solver
//! handles weights and redundant measurement sets uniformly.
// TODO: closed-form initialization (Chan-style) for poor starting geometry.

use thiserror::Error;

use crate::geometry::{Position, SPEED_OF_LIGHT_M_PER_S};
use crate::timebase::TickDuration;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalizationError {
    #[error("need at least {required} measurements for a {dims}-D fix, got {got}")]
    TooFewMeasurements {
        required: usize,
        got: usize,
        dims: usize,
    },
    #[error("anchor positions and weights must be finite, weights non-negative")]
    NonFiniteInput,
}

/// One hyperbolic constraint: the tag's ToF difference `td` towards the
/// anchor pair, with `td = tof(anchor_a) - tof(anchor_b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TdoaMeasurement {
    pub anchor_a: Position,
    pub anchor_b: Position,
    pub td: TickDuration,
    pub weight: f64,
}

impl TdoaMeasurement {
    pub fn new(anchor_a: Position, anchor_b: Position, td: TickDuration) -> Self {
        TdoaMeasurement {
            anchor_a,
            anchor_b,
            td,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Range difference implied by `td`, in meters.
    pub fn range_difference_m(&self) -> f64 {
        self.td.as_secs_f64() * SPEED_OF_LIGHT_M_PER_S
    }

    /// A physically realizable measurement satisfies
    /// `|td| * c <= |anchor_a - anchor_b| + slack`.
    pub fn is_feasible(&self, slack_m: f64) -> bool {
        self.range_difference_m().abs() <= self.anchor_a.distance_to(&self.anchor_b) + slack_m
    }
}

/// Solver configuration. Defaults: 50 iterations, convergence when the
/// step norm drops below 1e-9 m or the squared-residual change below
/// 1e-12 m^2, lambda starting at 1e-3 (x0.3 on success, x10 on failure).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub step_tolerance_m: f64,
    pub residual_tolerance_m2: f64,
    pub lambda_init: f64,
    pub lambda_decrease: f64,
    pub lambda_increase: f64,
    pub lambda_max: f64,
    /// Solve for z as well; requires one more measurement.
    pub three_d: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 50,
            step_tolerance_m: 1e-9,
            residual_tolerance_m2: 1e-12,
            lambda_init: 1e-3,
            lambda_decrease: 0.3,
            lambda_increase: 10.0,
            lambda_max: 1e12,
            three_d: false,
        }
    }
}

impl SolverConfig {
    fn dims(&self) -> usize {
        if self.three_d {
            3
        } else {
            2
        }
    }
}

/// Result of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionFix {
    pub position: Position,
    /// Weighted RMS of the range-difference residuals, meters.
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fix landed outside the anchor convex hull (poor dilution of
    /// precision; the fix is still reported).
    pub outside_anchor_hull: bool,
    /// Indices of measurements whose `|td| * c` exceeds the anchor
    /// baseline plus the solver's step tolerance. Flagged, never clamped.
    pub infeasible: Vec<usize>,
}

/// Weighted RMS residual of a candidate position against the measurements.
pub fn residual_rms(measurements: &[TdoaMeasurement], position: Position) -> f64 {
    let mut sum = 0.0;
    let mut weight_sum = 0.0;
    for m in measurements {
        let r = residual(m, position);
        sum += m.weight * r * r;
        weight_sum += m.weight;
    }
    if weight_sum == 0.0 {
        0.0
    } else {
        (sum / weight_sum).sqrt()
    }
}

/// ToF to the first anchor from the measured difference and a known ToF to
/// the second: `tof_at = td + tof_bt`.
pub fn infer_tof(td: TickDuration, known_tof_bt: TickDuration) -> TickDuration {
    td + known_tof_bt
}

fn residual(m: &TdoaMeasurement, p: Position) -> f64 {
    p.distance_to(&m.anchor_a) - p.distance_to(&m.anchor_b) - m.range_difference_m()
}

fn weighted_ssr(measurements: &[TdoaMeasurement], p: Position) -> f64 {
    measurements
        .iter()
        .map(|m| {
            let r = residual(m, p);
            m.weight * r * r
        })
        .sum()
}

/// Gradient of the residual: unit(p - a) - unit(p - b), per dimension.
fn jacobian_row(m: &TdoaMeasurement, p: Position) -> [f64; 3] {
    let to = |anchor: &Position| {
        let dx = p.x - anchor.x;
        let dy = p.y - anchor.y;
        let dz = p.z - anchor.z;
        let d = (dx * dx + dy * dy + dz * dz).sqrt().max(1e-12);
        [dx / d, dy / d, dz / d]
    };
    let ua = to(&m.anchor_a);
    let ub = to(&m.anchor_b);
    [ua[0] - ub[0], ua[1] - ub[1], ua[2] - ub[2]]
}

/// Solves the 3x3 system `n * x = g` by Gaussian elimination with partial
/// pivoting (the 2-D case pads the z row with the identity). `None` when
/// the pivot collapses.
fn solve_linear(mut n: [[f64; 3]; 3], mut g: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| n[i][col].abs().total_cmp(&n[j][col].abs()))
            .unwrap();
        if n[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        n.swap(col, pivot_row);
        g.swap(col, pivot_row);
        for row in (col + 1)..3 {
            let f = n[row][col] / n[col][col];
            for k in col..3 {
                n[row][k] -= f * n[col][k];
            }
            g[row] -= f * g[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = g[row];
        for k in (row + 1)..3 {
            acc -= n[row][k] * x[k];
        }
        x[row] = acc / n[row][row];
    }
    Some(x)
}

/// Smallest/largest eigenvalue ratio of the symmetric normal matrix, used
/// to detect rank-deficient geometry (all hyperbola gradients parallel).
fn normal_matrix_conditioning(n: &[[f64; 3]; 3], dims: usize) -> f64 {
    if dims == 2 {
        // Eigenvalues of the 2x2 block.
        let (a, b, c) = (n[0][0], n[0][1], n[1][1]);
        let mean = (a + c) / 2.0;
        let disc = ((a - c) / 2.0).powi(2) + b * b;
        let root = disc.max(0.0).sqrt();
        let hi = mean + root;
        let lo = mean - root;
        if hi <= 0.0 {
            0.0
        } else {
            lo / hi
        }
    } else {
        // det / (trace/3)^3 is the product of trace-normalized eigenvalues;
        // adequate as a rank probe.
        let trace = n[0][0] + n[1][1] + n[2][2];
        let det = n[0][0] * (n[1][1] * n[2][2] - n[1][2] * n[2][1])
            - n[0][1] * (n[1][0] * n[2][2] - n[1][2] * n[2][0])
            + n[0][2] * (n[1][0] * n[2][1] - n[1][1] * n[2][0]);
        if trace <= 0.0 {
            0.0
        } else {
            (det / (trace / 3.0).powi(3)).abs()
        }
    }
}

/// Solves for the tag position. `initial` defaults to the centroid of all
/// anchors. Needs at least 2 measurements in 2-D, 3 in 3-D, with anchor
/// geometry that actually constrains both (all three) coordinates;
/// rank-deficient geometry at every iterate yields `converged = false`.
pub fn solve(
    measurements: &[TdoaMeasurement],
    initial: Option<Position>,
    config: &SolverConfig,
) -> Result<PositionFix, LocalizationError> {
    let dims = config.dims();
    if measurements.len() < dims {
        return Err(LocalizationError::TooFewMeasurements {
            required: dims,
            got: measurements.len(),
            dims,
        });
    }
    for m in measurements {
        if !(m.anchor_a.is_finite() && m.anchor_b.is_finite())
            || !m.weight.is_finite()
            || m.weight < 0.0
        {
            return Err(LocalizationError::NonFiniteInput);
        }
    }

    let infeasible: Vec<usize> = measurements
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_feasible(config.step_tolerance_m))
        .map(|(i, _)| i)
        .collect();

    let anchors: Vec<Position> = measurements
        .iter()
        .flat_map(|m| [m.anchor_a, m.anchor_b])
        .collect();
    let mut p = initial.unwrap_or_else(|| centroid(&anchors));
    if !config.three_d {
        p.z = 0.0;
    }

    let mut lambda = config.lambda_init;
    let mut ssr = weighted_ssr(measurements, p);
    let mut iterations = 0;
    let mut converged = false;
    let mut full_rank_seen = false;

    for _ in 0..config.max_iterations {
        iterations += 1;

        // Normal equations J^T W J and J^T W r at the current iterate.
        let mut n = [[0.0f64; 3]; 3];
        let mut g = [0.0f64; 3];
        for m in measurements {
            let row = jacobian_row(m, p);
            let r = residual(m, p);
            for i in 0..3 {
                for j in 0..3 {
                    n[i][j] += m.weight * row[i] * row[j];
                }
                g[i] += m.weight * row[i] * r;
            }
        }
        if dims == 2 {
            n[2] = [0.0, 0.0, 1.0];
            n[0][2] = 0.0;
            n[1][2] = 0.0;
            n[2][0] = 0.0;
            n[2][1] = 0.0;
            g[2] = 0.0;
        }
        if normal_matrix_conditioning(&n, dims) > 1e-12 {
            full_rank_seen = true;
        }

        // Damped step: retry with larger lambda until the residual drops.
        let mut stepped = false;
        while lambda <= config.lambda_max {
            let mut damped = n;
            for (i, row) in damped.iter_mut().enumerate().take(dims) {
                row[i] += lambda;
            }
            let Some(delta) = solve_linear(damped, [-g[0], -g[1], -g[2]]) else {
                lambda *= config.lambda_increase;
                continue;
            };
            let candidate = Position {
                x: p.x + delta[0],
                y: p.y + delta[1],
                z: if dims == 3 { p.z + delta[2] } else { p.z },
            };
            let candidate_ssr = weighted_ssr(measurements, candidate);
            if candidate_ssr <= ssr {
                let step_norm = (delta[0] * delta[0]
                    + delta[1] * delta[1]
                    + if dims == 3 { delta[2] * delta[2] } else { 0.0 })
                .sqrt();
                let ssr_change = ssr - candidate_ssr;
                p = candidate;
                ssr = candidate_ssr;
                lambda = (lambda * config.lambda_decrease).max(1e-15);
                stepped = true;
                if step_norm < config.step_tolerance_m
                    || ssr_change < config.residual_tolerance_m2
                {
                    converged = true;
                }
                break;
            }
            lambda *= config.lambda_increase;
        }
        if !stepped || converged {
            break;
        }
    }

    converged = converged && full_rank_seen;

    Ok(PositionFix {
        position: p,
        residual_rms: residual_rms(measurements, p),
        iterations,
        converged,
        outside_anchor_hull: !inside_hull(&anchors, p, dims),
        infeasible,
    })
}

fn centroid(points: &[Position]) -> Position {
    let n = points.len().max(1) as f64;
    Position {
        x: points.iter().map(|p| p.x).sum::<f64>() / n,
        y: points.iter().map(|p| p.y).sum::<f64>() / n,
        z: points.iter().map(|p| p.z).sum::<f64>() / n,
    }
}

/// Point-in-convex-hull test. 2-D uses the exact hull (monotone chain);
/// 3-D falls back to the axis-aligned bounding box of the anchors.
fn inside_hull(anchors: &[Position], p: Position, dims: usize) -> bool {
    const EPS: f64 = 1e-9;
    if dims == 3 {
        let within = |get: fn(&Position) -> f64| {
            let lo = anchors.iter().map(get).fold(f64::INFINITY, f64::min);
            let hi = anchors.iter().map(get).fold(f64::NEG_INFINITY, f64::max);
            get(&p) >= lo - EPS && get(&p) <= hi + EPS
        };
        return within(|a| a.x) && within(|a| a.y) && within(|a| a.z);
    }

    let mut pts: Vec<(f64, f64)> = anchors.iter().map(|a| (a.x, a.y)).collect();
    pts.sort_by(|l, r| l.partial_cmp(r).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return false;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Monotone chain, lower then upper half.
    let build = |iter: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut half: Vec<(f64, f64)> = Vec::new();
        for pt in iter {
            while half.len() >= 2 && cross(half[half.len() - 2], half[half.len() - 1], pt) <= 0.0 {
                half.pop();
            }
            half.push(pt);
        }
        half
    };
    let mut hull = build(&mut pts.iter().copied());
    let upper = build(&mut pts.iter().rev().copied());
    hull.pop();
    hull.extend_from_slice(&upper[..upper.len().saturating_sub(1)]);
    if hull.len() < 3 {
        return false;
    }
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        if cross(a, b, (p.x, p.y)) < -EPS {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ground_truth;

    fn square_anchors() -> [Position; 4] {
        [
            Position::new(-50.0, -50.0),
            Position::new(50.0, -50.0),
            Position::new(50.0, 50.0),
            Position::new(-50.0, 50.0),
        ]
    }

    /// Noise-free measurements against a reference anchor.
    fn measurements_for(tag: Position, anchors: &[Position]) -> Vec<TdoaMeasurement> {
        anchors[1..]
            .iter()
            .map(|&other| {
                let truth = ground_truth(anchors[0], other, tag);
                TdoaMeasurement::new(anchors[0], other, truth.td)
            })
            .collect()
    }

    #[test]
    fn bisector_points_have_zero_residual() {
        let m = TdoaMeasurement::new(
            Position::new(-10.0, 0.0),
            Position::new(10.0, 0.0),
            TickDuration::ZERO,
        );
        for y in [-5.0, 0.0, 3.0, 40.0] {
            assert!(residual_rms(&[m], Position::new(0.0, y)) < 1e-12);
        }
    }

    #[test]
    fn orthogonal_pairs_pin_the_center() {
        let ms = vec![
            TdoaMeasurement::new(
                Position::new(-10.0, 0.0),
                Position::new(10.0, 0.0),
                TickDuration::ZERO,
            ),
            TdoaMeasurement::new(
                Position::new(0.0, -10.0),
                Position::new(0.0, 10.0),
                TickDuration::ZERO,
            ),
        ];
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(fix.converged);
        assert!(fix.position.x.abs() < 1e-9 && fix.position.y.abs() < 1e-9);
    }

    #[test]
    fn square_round_trip_recovers_the_tag() {
        let tag = Position::new(10.0, 20.0);
        let ms = measurements_for(tag, &square_anchors());
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(fix.converged, "{fix:?}");
        assert!(fix.iterations <= 50);
        assert!(
            fix.position.distance_to(&tag) < 1e-6,
            "error {}",
            fix.position.distance_to(&tag)
        );
        assert!(!fix.outside_anchor_hull);
        assert!(fix.infeasible.is_empty());
    }

    #[test]
    fn perturbed_measurement_matches_grid_search() {
        let tag = Position::new(10.0, 20.0);
        let mut ms = measurements_for(tag, &square_anchors());
        ms[0].td = ms[0].td + TickDuration::from_ns(1);
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(fix.converged);

        // Brute-force 1 mm grid over +/-1 m around the true tag position.
        let step = 0.001;
        let mut best = (f64::INFINITY, tag);
        for ix in -1000..=1000 {
            for iy in -1000..=1000 {
                let cand =
                    Position::new(tag.x + ix as f64 * step, tag.y + iy as f64 * step);
                let ssr = weighted_ssr(&ms, cand);
                if ssr < best.0 {
                    best = (ssr, cand);
                }
            }
        }
        let grid_min = best.1;
        assert!(
            fix.position.distance_to(&grid_min) <= step,
            "fix {:?} grid {:?}",
            fix.position,
            grid_min
        );
    }

    #[test]
    fn rigid_transforms_move_the_fix_rigidly() {
        let tag = Position::new(7.0, -13.0);
        let anchors = square_anchors();
        let ms = measurements_for(tag, &anchors);
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();

        let angle = 0.7f64;
        let (s, c) = angle.sin_cos();
        let transform = |p: Position| {
            Position::new(c * p.x - s * p.y + 3.0, s * p.x + c * p.y - 11.0)
        };
        let moved: Vec<Position> = anchors.iter().copied().map(transform).collect();
        let ms_t = measurements_for(transform(tag), &moved);
        let fix_t = solve(&ms_t, None, &SolverConfig::default()).unwrap();

        let expected = transform(fix.position);
        assert!(
            fix_t.position.distance_to(&expected) < 1e-9,
            "moved {:?} expected {:?}",
            fix_t.position,
            expected
        );
    }

    #[test]
    fn duplicate_measurements_leave_the_fix_unchanged() {
        // Anchors on a circle around the tag make every td exactly zero,
        // so the noise-free fixed point has zero residual and reweighting
        // a duplicated measurement cannot move it.
        let tag = Position::new(7.0, -3.0);
        let a1 = Position::new(tag.x + 50.0, tag.y);
        let a2 = Position::new(tag.x, tag.y + 50.0);
        let a3 = Position::new(tag.x - 50.0, tag.y);
        let mut ms = vec![
            TdoaMeasurement::new(a1, a2, TickDuration::ZERO),
            TdoaMeasurement::new(a1, a3, TickDuration::ZERO),
        ];
        let base = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(base.position.distance_to(&tag) < 1e-9);
        ms.push(ms[0]);
        let dup = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(base.position.distance_to(&dup.position) < 1e-9);
    }

    #[test]
    fn degenerate_geometry_does_not_claim_convergence() {
        // Two copies of the same pair constrain only one direction.
        let m = TdoaMeasurement::new(
            Position::new(-10.0, 0.0),
            Position::new(10.0, 0.0),
            TickDuration::from_ns(5),
        );
        let fix = solve(&[m, m], None, &SolverConfig::default()).unwrap();
        assert!(!fix.converged);
    }

    #[test]
    fn too_few_measurements_is_an_input_error() {
        let m = TdoaMeasurement::new(
            Position::new(-10.0, 0.0),
            Position::new(10.0, 0.0),
            TickDuration::ZERO,
        );
        assert_eq!(
            solve(&[m], None, &SolverConfig::default()).unwrap_err(),
            LocalizationError::TooFewMeasurements {
                required: 2,
                got: 1,
                dims: 2
            }
        );
    }

    #[test]
    fn tags_outside_the_hull_are_flagged() {
        let tag = Position::new(120.0, 140.0);
        let ms = measurements_for(tag, &square_anchors());
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert!(fix.outside_anchor_hull);
    }

    #[test]
    fn infeasible_measurements_are_flagged_not_clamped() {
        let mut ms = measurements_for(Position::new(0.0, 0.0), &square_anchors());
        // Baseline between (-50,-50) and (50,-50) is 100 m; claim 200 m.
        ms[0].td = TickDuration::from_ns(667); // ~200 m
        let fix = solve(&ms, None, &SolverConfig::default()).unwrap();
        assert_eq!(fix.infeasible, vec![0]);
    }

    #[test]
    fn inferred_tof_adds_the_known_leg() {
        assert_eq!(
            infer_tof(TickDuration::from_ns(-30), TickDuration::from_ns(80)),
            TickDuration::from_ns(50)
        );
    }

    #[test]
    fn three_d_mode_requires_three_measurements_and_solves() {
        let anchors = [
            Position::new_3d(-50.0, -50.0, 0.0),
            Position::new_3d(50.0, -50.0, 10.0),
            Position::new_3d(50.0, 50.0, 0.0),
            Position::new_3d(-50.0, 50.0, 10.0),
            Position::new_3d(0.0, 0.0, 30.0),
        ];
        let tag = Position::new_3d(5.0, -8.0, 12.0);
        let ms: Vec<TdoaMeasurement> = anchors[1..]
            .iter()
            .map(|&other| {
                let truth = ground_truth(anchors[0], other, tag);
                TdoaMeasurement::new(anchors[0], other, truth.td)
            })
            .collect();
        let config = SolverConfig {
            three_d: true,
            max_iterations: 100,
            ..SolverConfig::default()
        };
        assert_eq!(
            solve(&ms[..2], None, &config).unwrap_err(),
            LocalizationError::TooFewMeasurements {
                required: 3,
                got: 2,
                dims: 3
            }
        );
        let fix = solve(&ms, Some(Position::new_3d(0.0, 0.0, 5.0)), &config).unwrap();
        assert!(
            fix.position.distance_to(&tag) < 1e-5,
            "error {}",
            fix.position.distance_to(&tag)
        );
    }
}
