//! Morse codes: regular values between critical values, the genera of the
//! equipotential surfaces at those values, and the relations the genera
//! must satisfy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::critical::{is_distinct, CriticalCluster, CriticalPoint};
use crate::field::FieldEvaluator;
use crate::surface::{
    extract_with_stats, plan_grid, topology_with_flux, ExtractionStats, GridSpec, SurfaceConfig,
    SurfaceError, TopologyReport, TriMesh,
};

/// Share of the gap to the next critical value used as offset.
const GAP_SHARE: f64 = 0.4;
/// Smallest allowed distance from a critical value, as a share of the gap.
const MIN_GAP_SHARE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum MorseError {
    #[error("no critical values to place regular values around")]
    NoClusters,
    #[error("critical values must be strictly increasing, got {lower} then {upper}")]
    Unordered { lower: f64, upper: f64 },
    #[error(
        "critical values {lower} and {upper} are {gap:.3e} apart, below the {min_gap:.3e} needed to separate them reliably; \
         perturb the knot or tighten the clustering and Newton tolerances"
    )]
    TooClose {
        lower: f64,
        upper: f64,
        gap: f64,
        min_gap: f64,
    },
    #[error("level {level} lies within {margin:.3e} of the critical value {critical}")]
    NotRegular {
        level: f64,
        critical: f64,
        margin: f64,
    },
    #[error("invalid Morse settings: {0}")]
    InvalidConfig(String),
    #[error("surface at level {level}: {source}")]
    Surface {
        level: f64,
        #[source]
        source: SurfaceError,
    },
    #[error(
        "level {level}: component genera {coarse:?} on a {coarse_cells:?} grid but {fine:?} on the doubled grid"
    )]
    Unstable {
        level: f64,
        coarse: Vec<u32>,
        fine: Vec<u32>,
        coarse_cells: [usize; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MorseConfig {
    /// Critical values closer than this form one cluster; `None` selects
    /// `1e-5 · (V_max − V_min)`.
    pub cluster_tol: Option<f64>,
    /// Upper limit on the offset of a regular value above its critical value.
    pub epsilon_cap: Option<f64>,
    /// Explicit levels must stay this far from critical values, relative to
    /// the critical value.
    pub regular_margin: f64,
}

impl Default for MorseConfig {
    fn default() -> Self {
        MorseConfig {
            cluster_tol: None,
            epsilon_cap: None,
            regular_margin: 1e-3,
        }
    }
}

impl MorseConfig {
    pub fn validate(&self) -> Result<(), MorseError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if let Some(t) = self.cluster_tol {
            if !positive(t) {
                return Err(MorseError::InvalidConfig(format!("cluster_tol must be positive, got {t}")));
            }
        }
        if let Some(c) = self.epsilon_cap {
            if !positive(c) {
                return Err(MorseError::InvalidConfig(format!("epsilon_cap must be positive, got {c}")));
            }
        }
        if !positive(self.regular_margin) {
            return Err(MorseError::InvalidConfig(format!(
                "regular_margin must be positive, got {}",
                self.regular_margin
            )));
        }
        Ok(())
    }
}

/// Regular values around increasing critical values `V_1 < … < V_n`.
///
/// The first is `V_1 / 2`. Each later one sits above `V_i` by
/// `0.4 · (V_{i+1} − V_i)`, limited by `cap` but never below a tenth of the
/// gap. Above the last value the previous gap is reused, or `0.1 · V_1` for a
/// single value. Gaps under `min_gap` are refused.
pub fn choose_regular_values(values: &[f64], min_gap: f64, cap: Option<f64>) -> Result<Vec<f64>, MorseError> {
    if values.is_empty() {
        return Err(MorseError::NoClusters);
    }
    for w in values.windows(2) {
        let gap = w[1] - w[0];
        if gap <= 0.0 {
            return Err(MorseError::Unordered {
                lower: w[0],
                upper: w[1],
            });
        }
        if gap < min_gap {
            return Err(MorseError::TooClose {
                lower: w[0],
                upper: w[1],
                gap,
                min_gap,
            });
        }
    }
    let offset = |gap: f64| {
        let wanted = cap.map_or(GAP_SHARE * gap, |c| (GAP_SHARE * gap).min(c));
        wanted.max(MIN_GAP_SHARE * gap)
    };
    let n = values.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.5 * values[0]);
    for i in 0..n {
        let gap = if i + 1 < n {
            values[i + 1] - values[i]
        } else if n == 1 {
            0.25 * values[0]
        } else {
            values[n - 1] - values[n - 2]
        };
        out.push(values[i] + offset(gap));
    }
    Ok(out)
}

/// The genera `G_0, …, G_n` of the surfaces at the regular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseCode {
    pub genera: Vec<u32>,
    /// True when every critical value is attained by a single point.
    pub distinct: bool,
    pub regular_values: Vec<f64>,
}

impl std::fmt::Display for MorseCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.genera.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Genus comparison on the doubled grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub cells: [usize; 3],
    pub genera: Vec<u32>,
    pub triangles: usize,
}

/// One extracted equipotential surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSurface {
    pub level: f64,
    pub grid: GridSpec,
    pub feature_size: f64,
    /// The grid hit `max_resolution` before resolving `feature_size`.
    pub capped: bool,
    pub topology: TopologyReport,
    pub triangles: usize,
    pub stats: ExtractionStats,
    pub doubled: Option<DoublingCheck>,
    #[serde(skip)]
    pub mesh: TriMesh,
}

/// Extracts `Φ = level`, computes topology and flux, and when the surface
/// config asks for it repeats the extraction on the doubled grid, failing if
/// the component genera change.
pub fn extract_level(
    field: &FieldEvaluator,
    level: f64,
    critical: &[CriticalPoint],
    config: &SurfaceConfig,
) -> Result<LevelSurface, MorseError> {
    let wrap = |source| MorseError::Surface { level, source };
    let plan = plan_grid(field, level, critical, config).map_err(wrap)?;
    let (mesh, stats) = extract_with_stats(field, level, &plan.grid).map_err(wrap)?;
    let topology = topology_with_flux(field, &mesh).map_err(wrap)?;
    let doubled = if config.stability_check {
        let grid = plan.grid.doubled();
        let (fine, _) = extract_with_stats(field, level, &grid).map_err(wrap)?;
        let fine_topology = crate::surface::topology(&fine).map_err(wrap)?;
        if fine_topology.signature() != topology.signature() {
            return Err(MorseError::Unstable {
                level,
                coarse: topology.signature(),
                fine: fine_topology.signature(),
                coarse_cells: plan.grid.cells,
            });
        }
        Some(DoublingCheck {
            cells: grid.cells,
            genera: fine_topology.genera(),
            triangles: fine.triangles.len(),
        })
    } else {
        None
    };
    log::info!(
        "level {level}: genus {} over {} component(s), grid {:?}",
        topology.total_genus,
        topology.components.len(),
        plan.grid.cells
    );
    Ok(LevelSurface {
        level,
        grid: plan.grid,
        feature_size: plan.feature_size,
        capped: plan.capped,
        triangles: mesh.triangles.len(),
        topology,
        stats,
        doubled,
        mesh,
    })
}

/// A Morse code with the surfaces it was read from.
#[derive(Debug, Clone)]
pub struct MorseAnalysis {
    pub code: MorseCode,
    pub surfaces: Vec<LevelSurface>,
}

/// Places regular values between the cluster values, extracts one surface
/// per value and records its total genus.
pub fn assemble_morse_code(
    field: &FieldEvaluator,
    clusters: &[CriticalCluster],
    surface: &SurfaceConfig,
    morse: &MorseConfig,
    cluster_tol: f64,
) -> Result<MorseAnalysis, MorseError> {
    morse.validate()?;
    let values: Vec<f64> = clusters.iter().map(|c| c.value).collect();
    let regular = choose_regular_values(&values, 10.0 * cluster_tol, morse.epsilon_cap)?;
    let critical: Vec<CriticalPoint> = clusters.iter().flat_map(|c| c.points.iter().cloned()).collect();
    let surfaces = regular
        .iter()
        .map(|&level| extract_level(field, level, &critical, surface))
        .collect::<Result<Vec<_>, _>>()?;
    let code = MorseCode {
        genera: surfaces.iter().map(|s| s.topology.total_genus).collect(),
        distinct: is_distinct(clusters),
        regular_values: regular,
    };
    Ok(MorseAnalysis { code, surfaces })
}

/// Rejects a level within `margin · |V|` of some critical value `V`.
pub fn check_regular(level: f64, clusters: &[CriticalCluster], margin: f64) -> Result<(), MorseError> {
    for c in clusters {
        let allowed = margin * c.value.abs();
        for p in &c.points {
            if (level - p.value).abs() < allowed {
                return Err(MorseError::NotRegular {
                    level,
                    critical: p.value,
                    margin: allowed,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// False when the check does not apply to this run, for instance the
    /// singleton checks on a code with repeated critical values. Such checks
    /// count as passed.
    pub applicable: bool,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_NAMES: [&str; 7] = [
    "lemma1",
    "lemma2",
    "theorem1_steps",
    "theorem2_steps",
    "corollary1",
    "flux_positivity",
    "connectedness",
];

fn check(name: &str, passed: bool, details: String) -> Check {
    Check {
        name: name.into(),
        passed,
        applicable: true,
        details,
    }
}

fn not_applicable(name: &str, details: &str) -> Check {
    Check {
        name: name.into(),
        passed: true,
        applicable: false,
        details: details.into(),
    }
}

/// Checks the code against the relations between genera, indices and
/// surfaces. Failures are recorded, never raised.
///
/// * `lemma1`: the code starts at 0 and ends at 1.
/// * `lemma2`: with `m₁`, `m₂` the numbers of index-1 and index-2 points and
///   `N` the number of critical points including the point at infinity,
///   `m₁ − m₂ = 1` and `m₁ + m₂ + 1 = N`.
/// * `theorem1_steps` (distinct codes): each step is +1 across an index-1
///   value and −1 across an index-2 value.
/// * `theorem2_steps`: each step equals `m − n` of its cluster, and the first
///   cluster has `m > n`.
/// * `corollary1` (distinct codes): `G_1 = 1`.
/// * `flux_positivity`: every surface component has positive outward flux.
/// * `connectedness`: every surface is connected.
pub fn verify(code: &MorseCode, clusters: &[CriticalCluster], surfaces: &[TopologyReport]) -> VerificationReport {
    let g = &code.genera;
    let mut checks = Vec::with_capacity(CHECK_NAMES.len());
    let steps: Vec<i64> = g.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    let shape_ok = g.len() == clusters.len() + 1;
    let shape_note = format!("{} genera for {} critical values", g.len(), clusters.len());

    checks.push(check(
        "lemma1",
        g.first() == Some(&0) && g.last() == Some(&1),
        format!("G_0 = {:?}, G_last = {:?}", g.first(), g.last()),
    ));

    let m1: usize = clusters.iter().map(|c| c.m).sum();
    let m2: usize = clusters.iter().map(|c| c.n).sum();
    let finite: usize = clusters.iter().map(|c| c.points.len()).sum();
    let n_total = finite + 1;
    checks.push(check(
        "lemma2",
        m1 as i64 - m2 as i64 == 1 && m1 + m2 + 1 == n_total,
        format!("m1 = {m1}, m2 = {m2}, N = {n_total} ({finite} finite points and infinity)"),
    ));

    if code.distinct {
        let mut bad = Vec::new();
        if !shape_ok {
            bad.push(shape_note.clone());
        } else {
            for (i, (step, c)) in steps.iter().zip(clusters).enumerate() {
                let expected = match c.points[0].index {
                    1 => 1,
                    2 => -1,
                    other => {
                        bad.push(format!("critical value {} has index {other}", i + 1));
                        continue;
                    }
                };
                if *step != expected {
                    bad.push(format!(
                        "step {} is {step:+} across index {} but should be {expected:+}",
                        i + 1,
                        c.points[0].index
                    ));
                }
            }
        }
        checks.push(check(
            "theorem1_steps",
            bad.is_empty(),
            if bad.is_empty() {
                format!("steps {steps:?} match the indices")
            } else {
                bad.join("; ")
            },
        ));
    } else {
        checks.push(not_applicable("theorem1_steps", "critical values repeat"));
    }

    let mut bad = Vec::new();
    if !shape_ok {
        bad.push(shape_note);
    } else {
        for (i, (step, c)) in steps.iter().zip(clusters).enumerate() {
            if *step != c.genus_step() {
                bad.push(format!("step {} is {step:+} but m − n = {:+}", i + 1, c.genus_step()));
            }
        }
    }
    if let Some(first) = clusters.first() {
        if first.m <= first.n {
            bad.push(format!("first cluster has m = {} ≤ n = {}", first.m, first.n));
        }
    }
    checks.push(check(
        "theorem2_steps",
        bad.is_empty(),
        if bad.is_empty() {
            format!("steps {steps:?} equal m − n per cluster")
        } else {
            bad.join("; ")
        },
    ));

    if code.distinct {
        checks.push(check("corollary1", g.get(1) == Some(&1), format!("G_1 = {:?}", g.get(1))));
    } else {
        checks.push(not_applicable("corollary1", "critical values repeat"));
    }

    let mut bad = Vec::new();
    for (level, s) in code.regular_values.iter().zip(surfaces) {
        for (k, c) in s.components.iter().enumerate() {
            match c.flux {
                Some(f) if f > 0.0 => {}
                Some(f) => bad.push(format!("level {level} component {k}: flux {f}")),
                None => bad.push(format!("level {level} component {k}: flux not computed")),
            }
        }
    }
    let smallest = surfaces
        .iter()
        .flat_map(|s| s.components.iter().filter_map(|c| c.flux))
        .fold(f64::INFINITY, f64::min);
    checks.push(check(
        "flux_positivity",
        bad.is_empty() && !surfaces.is_empty(),
        if bad.is_empty() {
            format!("smallest component flux {smallest:.6}")
        } else {
            bad.join("; ")
        },
    ));

    let split: Vec<String> = code
        .regular_values
        .iter()
        .zip(surfaces)
        .filter(|(_, s)| s.components.len() != 1)
        .map(|(level, s)| format!("level {level}: {} components", s.components.len()))
        .collect();
    checks.push(check(
        "connectedness",
        split.is_empty() && surfaces.len() == code.regular_values.len(),
        if split.is_empty() {
            format!("{} surfaces, each connected", surfaces.len())
        } else {
            split.join("; ")
        },
    ));

    VerificationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(value: f64, indices: &[usize]) -> CriticalCluster {
        let points: Vec<CriticalPoint> = indices
            .iter()
            .map(|&index| CriticalPoint {
                position: [0.0; 3],
                value,
                grad_norm: 0.0,
                eigenvalues: [-1.0, 0.5, 0.5],
                index,
            })
            .collect();
        CriticalCluster {
            value,
            m: indices.iter().filter(|&&i| i == 1).count(),
            n: indices.iter().filter(|&&i| i == 2).count(),
            points,
        }
    }

    fn connected(n: usize, flux: f64) -> Vec<TopologyReport> {
        use crate::surface::fixtures::octahedron;
        let mesh = octahedron(0.0);
        let mut r = crate::surface::topology(&mesh).unwrap();
        r.components[0].flux = Some(flux);
        vec![r; n]
    }

    fn approx(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn equal_gaps() {
        let v = choose_regular_values(&[1.0, 2.0, 3.0], 1e-3, None).unwrap();
        assert!(approx(&v, &[0.5, 1.4, 2.4, 3.4]), "{v:?}");
    }

    #[test]
    fn single_value() {
        let v = choose_regular_values(&[std::f64::consts::TAU], 1e-3, None).unwrap();
        assert!(approx(&v, &[0.5 * std::f64::consts::TAU, 1.1 * std::f64::consts::TAU]));
    }

    #[test]
    fn cap_limits_offsets_but_keeps_a_tenth() {
        let v = choose_regular_values(&[1.0, 2.0, 12.0], 1e-3, Some(0.2)).unwrap();
        assert!(approx(&v, &[0.5, 1.2, 3.0, 13.0]), "{v:?}");
    }

    #[test]
    fn refuses_close_or_unordered_values() {
        assert!(matches!(
            choose_regular_values(&[1.0, 1.0005], 1e-3, None),
            Err(MorseError::TooClose { .. })
        ));
        assert!(matches!(
            choose_regular_values(&[2.0, 1.0], 1e-3, None),
            Err(MorseError::Unordered { .. })
        ));
        assert!(matches!(choose_regular_values(&[], 1e-3, None), Err(MorseError::NoClusters)));
    }

    #[test]
    fn trefoil_like_code_passes_everything() {
        let clusters = [cluster(12.79, &[1, 1, 1]), cluster(15.42, &[1]), cluster(15.82, &[2, 2, 2])];
        let code = MorseCode {
            genera: vec![0, 3, 4, 1],
            distinct: false,
            regular_values: vec![6.4, 13.8, 15.6, 16.0],
        };
        let report = verify(&code, &clusters, &connected(4, 1.0));
        assert!(report.all_passed(), "{report:#?}");
        assert_eq!(report.checks.len(), CHECK_NAMES.len());
        for (c, name) in report.checks.iter().zip(CHECK_NAMES) {
            assert_eq!(c.name, name);
        }
        assert!(!report.get("theorem1_steps").unwrap().applicable);
        assert!(!report.get("corollary1").unwrap().applicable);
    }

    #[test]
    fn step_of_two_breaks_theorem1() {
        let clusters = [cluster(1.0, &[1]), cluster(2.0, &[2])];
        let code = MorseCode {
            genera: vec![0, 2, 1],
            distinct: true,
            regular_values: vec![0.5, 1.4, 2.4],
        };
        let report = verify(&code, &clusters, &connected(3, 1.0));
        assert!(!report.get("theorem1_steps").unwrap().passed);
        assert!(!report.get("corollary1").unwrap().passed);
        assert!(report.get("lemma1").unwrap().passed);
    }

    #[test]
    fn circle_counts() {
        let clusters = [cluster(std::f64::consts::TAU, &[1])];
        let code = MorseCode {
            genera: vec![0, 1],
            distinct: true,
            regular_values: vec![3.1, 6.9],
        };
        let report = verify(&code, &clusters, &connected(2, 78.9));
        assert!(report.all_passed());
        assert_eq!(report.get("lemma2").unwrap().details, "m1 = 1, m2 = 0, N = 2 (1 finite points and infinity)");
    }

    #[test]
    fn negative_flux_and_split_surfaces_are_reported() {
        let clusters = [cluster(6.0, &[1])];
        let code = MorseCode {
            genera: vec![0, 1],
            distinct: true,
            regular_values: vec![3.0, 6.6],
        };
        let mut surfaces = connected(2, -1.0);
        let copy = surfaces[1].components[0].clone();
        surfaces[1].components.push(copy);
        let report = verify(&code, &clusters, &surfaces);
        assert!(!report.get("flux_positivity").unwrap().passed);
        assert!(!report.get("connectedness").unwrap().passed);
    }

    #[test]
    fn regularity_guard() {
        let clusters = [cluster(12.0, &[1])];
        assert!(matches!(check_regular(12.001, &clusters, 1e-3), Err(MorseError::NotRegular { .. })));
        assert!(check_regular(12.5, &clusters, 1e-3).is_ok());
    }
}
