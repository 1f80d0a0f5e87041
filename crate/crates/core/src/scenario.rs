//! World description, validation, random generation, and file I/O.
//!
//! All power and gain quantities are stored in linear units (watts,
//! dimensionless). dB/dBm values appear only in files and on the CLI,
//! always under unit-suffixed keys (`p_avg_dbm`, `beta0_db`, ...).

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Disk, Point2};

/// Current scenario file schema.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Clearance enforced between ground nodes and no-fly-zone boundaries
/// during random generation, so initial trajectories that hover over a
/// node are not born infeasible.
pub const GN_NFZ_MARGIN_M: f64 = 1.0;

/// Attempt budget for rejection sampling in [`generate_random`].
pub const PACKING_ATTEMPTS: usize = 100_000;

/// Immutable world description: ground nodes, no-fly-zones, and the
/// UAV/channel/power parameters of one planning instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Flight period in seconds.
    pub t_total: f64,
    /// Number of time slots.
    pub n_slots: usize,
    /// Fixed flight altitude in meters.
    pub altitude: f64,
    /// Maximum horizontal speed in meters per second.
    pub v_max: f64,
    /// Average transmit power budget in watts.
    pub p_avg: f64,
    /// Peak transmit power in watts.
    pub p_peak: f64,
    /// Channel power gain at 1 m reference distance (linear).
    pub beta0: f64,
    /// Noise power in watts.
    pub sigma2: f64,
    /// Ground node positions.
    pub gns: Vec<Point2>,
    /// No-fly-zone disks.
    pub nfzs: Vec<Disk>,
    /// Side length of the square deployment area in meters.
    pub area: f64,
}

/// Which no-fly-zone constraint the optimizer enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NfzMode {
    /// Expanded-radius constraint pair: waypoints of each slot stay
    /// outside `sqrt(R^2 + (V*delta/2)^2)`, which provably protects the
    /// whole in-between segment.
    Proposed,
    /// Waypoint-only constraint `||q[n] - c|| >= R`: the baseline whose
    /// continuous-path violations this project demonstrates.
    Conventional,
}

impl fmt::Display for NfzMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NfzMode::Proposed => write!(f, "proposed"),
            NfzMode::Conventional => write!(f, "conventional"),
        }
    }
}

/// Optimizer knobs. Defaults follow the evaluation setup: surrogate
/// offsets 100, penalty ramp 1 -> 1e6 with factor 1.2, stop threshold
/// 1e-4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgoConfig {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta_init: f64,
    pub eta_max: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub delta_min_s: f64,
    pub max_iters: usize,
    pub nfz_mode: NfzMode,
    pub seed: u64,
    /// Ratio-weight refreshes per outer iteration. 1 matches the plain
    /// alternating loop; higher values re-solve the trajectory program
    /// with refreshed weights at a fixed expansion point.
    pub inner_qt_iters: usize,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            gamma1: 100.0,
            gamma2: 100.0,
            eta_init: 1.0,
            eta_max: 1e6,
            kappa: 1.2,
            epsilon: 1e-4,
            delta_min_s: 1e-3,
            max_iters: 200,
            nfz_mode: NfzMode::Proposed,
            seed: 0,
            inner_qt_iters: 1,
        }
    }
}

impl AlgoConfig {
    /// Basic sanity of the knob values.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut bad = vec![];
        if self.gamma1 < 0.0 {
            bad.push("gamma1 >= 0".to_string());
        }
        if self.gamma2 < 0.0 {
            bad.push("gamma2 >= 0".to_string());
        }
        if self.eta_init <= 0.0 {
            bad.push("eta_init > 0".to_string());
        }
        if self.kappa <= 1.0 {
            bad.push("kappa > 1".to_string());
        }
        if self.epsilon <= 0.0 {
            bad.push("epsilon > 0".to_string());
        }
        if self.delta_min_s <= 0.0 {
            bad.push("delta_min_s > 0".to_string());
        }
        if self.inner_qt_iters == 0 {
            bad.push("inner_qt_iters >= 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::InvalidConfig(bad.join(", ")))
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0:?}")]
    Invalid(Vec<String>),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("could not pack {what} after {attempts} rejection attempts (seed {seed})")]
    PackingFailure { what: &'static str, attempts: usize, seed: u64 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema version mismatch in {path}: found {found}, expected {expected}")]
    SchemaVersion { path: String, found: u32, expected: u32 },
}

/// dBm to watts: `10^((dbm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm, adjusted by up to a few ulps so that
/// `dbm_to_watts(watts_to_dbm(w)) == w` holds bit-for-bit whenever `w`
/// itself came through `dbm_to_watts`. Round-tripping through log10/pow
/// is otherwise not exact.
pub fn watts_to_dbm(watts: f64) -> f64 {
    let d0 = 10.0 * watts.log10() + 30.0;
    snap_inverse(d0, watts, dbm_to_watts)
}

/// dB to linear ratio: `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB, with the same round-trip fixup as [`watts_to_dbm`].
pub fn linear_to_db(linear: f64) -> f64 {
    let d0 = 10.0 * linear.log10();
    snap_inverse(d0, linear, db_to_linear)
}

fn snap_inverse(guess: f64, target: f64, forward: fn(f64) -> f64) -> f64 {
    if forward(guess) == target {
        return guess;
    }
    let mut up = guess;
    let mut down = guess;
    for _ in 0..8 {
        up = f64::from_bits(up.to_bits() + 1);
        if forward(up) == target {
            return up;
        }
        down = f64::from_bits(down.to_bits().wrapping_sub(1));
        if forward(down) == target {
            return down;
        }
    }
    guess
}

/// Default parameters: 50 s horizon in 50 slots, 30 m altitude, 30 m/s
/// speed cap, 20 dBm average power with a 4x peak, -30 dB reference gain,
/// -70 dBm noise, 400 m square area. Node and zone lists are left empty
/// for [`generate_random`] to fill.
pub fn default_scenario() -> Scenario {
    let p_avg = dbm_to_watts(20.0);
    Scenario {
        t_total: 50.0,
        n_slots: 50,
        altitude: 30.0,
        v_max: 30.0,
        p_avg,
        p_peak: 4.0 * p_avg,
        beta0: db_to_linear(-30.0),
        sigma2: dbm_to_watts(-70.0),
        gns: Vec::new(),
        nfzs: Vec::new(),
        area: 400.0,
    }
}

/// Populate `base` with `m` no-fly disks of radius `r_m` and `k` ground
/// nodes, all uniform over the square, by rejection sampling. Zones may
/// not overlap each other and nodes must clear every zone by
/// [`GN_NFZ_MARGIN_M`]. Deterministic in `seed`.
pub fn generate_random(
    base: &Scenario,
    seed: u64,
    r_m: f64,
    m: usize,
    k: usize,
) -> Result<Scenario, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = base.area / 2.0;
    let mut attempts = 0usize;

    let mut nfzs: Vec<Disk> = Vec::with_capacity(m);
    while nfzs.len() < m {
        attempts += 1;
        if attempts > PACKING_ATTEMPTS {
            return Err(ScenarioError::PackingFailure {
                what: "no-fly-zones",
                attempts: PACKING_ATTEMPTS,
                seed,
            });
        }
        let c = Point2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        if nfzs.iter().all(|d| c.dist(d.center) >= d.radius + r_m) {
            nfzs.push(Disk::new(c, r_m));
        }
    }

    let mut gns: Vec<Point2> = Vec::with_capacity(k);
    while gns.len() < k {
        attempts += 1;
        if attempts > PACKING_ATTEMPTS {
            return Err(ScenarioError::PackingFailure {
                what: "ground nodes",
                attempts: PACKING_ATTEMPTS,
                seed,
            });
        }
        let w = Point2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        if nfzs.iter().all(|d| w.dist(d.center) >= d.radius + GN_NFZ_MARGIN_M) {
            gns.push(w);
        }
    }

    let mut out = base.clone();
    out.gns = gns;
    out.nfzs = nfzs;
    Ok(out)
}

/// Check every invariant; returns one human-readable line per violation,
/// empty when the scenario is well-formed.
pub fn validate(s: &Scenario) -> Vec<String> {
    let mut v = Vec::new();
    if !(s.t_total > 0.0) {
        v.push(format!("t_total > 0 violated: {}", s.t_total));
    }
    if s.n_slots < 1 {
        v.push("n_slots >= 1 violated: 0".to_string());
    }
    if !(s.altitude > 0.0) {
        v.push(format!("altitude > 0 violated: {}", s.altitude));
    }
    if !(s.v_max > 0.0) {
        v.push(format!("v_max > 0 violated: {}", s.v_max));
    }
    if !(s.p_avg > 0.0) {
        v.push(format!("p_avg > 0 violated: {}", s.p_avg));
    }
    if !(s.p_avg <= s.p_peak) {
        v.push(format!("p_avg <= p_peak violated: {} > {}", s.p_avg, s.p_peak));
    }
    if !(s.beta0 > 0.0) {
        v.push(format!("beta0 > 0 violated: {}", s.beta0));
    }
    if !(s.sigma2 > 0.0) {
        v.push(format!("sigma2 > 0 violated: {}", s.sigma2));
    }
    if !(s.area > 0.0) {
        v.push(format!("area > 0 violated: {}", s.area));
    }
    for (i, g) in s.gns.iter().enumerate() {
        if !g.is_finite() {
            v.push(format!("gn {i} has non-finite coordinates"));
        }
    }
    for (i, d) in s.nfzs.iter().enumerate() {
        if !d.center.is_finite() || !d.radius.is_finite() {
            v.push(format!("nfz {i} has non-finite fields"));
        } else if !(d.radius > 0.0) {
            v.push(format!("nfz {i} radius > 0 violated: {}", d.radius));
        }
    }
    for i in 0..s.nfzs.len() {
        for j in (i + 1)..s.nfzs.len() {
            let dist = s.nfzs[i].center.dist(s.nfzs[j].center);
            let need = s.nfzs[i].radius + s.nfzs[j].radius;
            if dist < need {
                v.push(format!(
                    "nfzs {i} and {j} overlap: center distance {dist} < {need}"
                ));
            }
        }
    }
    for (k, g) in s.gns.iter().enumerate() {
        for (m, d) in s.nfzs.iter().enumerate() {
            let dist = g.dist(d.center);
            if dist <= d.radius {
                v.push(format!(
                    "gn {k} inside nfz {m}: distance {dist} <= radius {}",
                    d.radius
                ));
            }
        }
    }
    v
}

// --- file schema ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    #[serde(rename = "T_s")]
    t_s: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "H_m")]
    h_m: f64,
    #[serde(rename = "V_mps")]
    v_mps: f64,
    p_avg_dbm: f64,
    p_peak_dbm: f64,
    beta0_db: f64,
    sigma2_dbm: f64,
    area_m: f64,
    gns: Vec<GnFile>,
    nfzs: Vec<NfzFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GnFile {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NfzFile {
    x: f64,
    y: f64,
    r: f64,
}

/// Write the scenario as pretty-printed JSON. Power quantities are
/// converted to dBm/dB at this boundary.
pub fn save(s: &Scenario, path: &Path) -> Result<(), ScenarioError> {
    let file = ScenarioFile {
        schema_version: SCENARIO_SCHEMA_VERSION,
        t_s: s.t_total,
        n: s.n_slots,
        h_m: s.altitude,
        v_mps: s.v_max,
        p_avg_dbm: watts_to_dbm(s.p_avg),
        p_peak_dbm: watts_to_dbm(s.p_peak),
        beta0_db: linear_to_db(s.beta0),
        sigma2_dbm: watts_to_dbm(s.sigma2),
        area_m: s.area,
        gns: s.gns.iter().map(|g| GnFile { x: g.x, y: g.y }).collect(),
        nfzs: s
            .nfzs
            .iter()
            .map(|d| NfzFile { x: d.center.x, y: d.center.y, r: d.radius })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Load and validate a scenario file. Fails without a partial result on
/// malformed JSON, unknown or missing keys, a schema-version mismatch, or
/// invariant violations.
pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    // Peek at the version first so a mismatch is reported as such even if
    // the rest of the schema moved.
    #[derive(Deserialize)]
    struct VersionOnly {
        schema_version: Option<u32>,
    }
    if let Ok(v) = serde_json::from_str::<VersionOnly>(&text) {
        if let Some(found) = v.schema_version {
            if found != SCENARIO_SCHEMA_VERSION {
                return Err(ScenarioError::SchemaVersion {
                    path: path.display().to_string(),
                    found,
                    expected: SCENARIO_SCHEMA_VERSION,
                });
            }
        }
    }
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let s = Scenario {
        t_total: file.t_s,
        n_slots: file.n,
        altitude: file.h_m,
        v_max: file.v_mps,
        p_avg: dbm_to_watts(file.p_avg_dbm),
        p_peak: dbm_to_watts(file.p_peak_dbm),
        beta0: db_to_linear(file.beta0_db),
        sigma2: dbm_to_watts(file.sigma2_dbm),
        gns: file.gns.into_iter().map(|g| Point2::new(g.x, g.y)).collect(),
        nfzs: file
            .nfzs
            .into_iter()
            .map(|z| Disk::new(Point2::new(z.x, z.y), z.r))
            .collect(),
        area: file.area_m,
    };
    let violations = validate(&s);
    if !violations.is_empty() {
        return Err(ScenarioError::Invalid(violations));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn default_values() {
        let s = default_scenario();
        assert_eq!(s.t_total, 50.0);
        assert_eq!(s.n_slots, 50);
        assert_eq!(s.altitude, 30.0);
        assert_eq!(s.v_max, 30.0);
        assert_eq!(s.p_avg, 0.1);
        assert_eq!(s.p_peak, 0.4);
        assert_eq!(s.beta0, 1e-3);
        assert_eq!(s.sigma2, 1e-10);
        assert_eq!(s.area, 400.0);
        assert!(s.gns.is_empty() && s.nfzs.is_empty());
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let base = default_scenario();
        let a = generate_random(&base, 1, 50.0, 3, 4).unwrap();
        let b = generate_random(&base, 1, 50.0, 3, 4).unwrap();
        assert_eq!(a, b);
        assert!(validate(&a).is_empty());
        // Direct distance re-check, independent of validate().
        for i in 0..a.nfzs.len() {
            for j in (i + 1)..a.nfzs.len() {
                assert!(
                    a.nfzs[i].center.dist(a.nfzs[j].center)
                        >= a.nfzs[i].radius + a.nfzs[j].radius
                );
            }
        }
        for g in &a.gns {
            for d in &a.nfzs {
                assert!(g.dist(d.center) > d.radius);
            }
        }
        let c = generate_random(&base, 2, 50.0, 3, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generation_with_no_zones_succeeds() {
        let base = default_scenario();
        let s = generate_random(&base, 9, 50.0, 0, 4).unwrap();
        assert!(s.nfzs.is_empty());
        assert_eq!(s.gns.len(), 4);
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn generation_packing_failure() {
        let mut base = default_scenario();
        base.area = 100.0;
        // Ten radius-200 disks cannot pack a 100 m square.
        let err = generate_random(&base, 0, 200.0, 10, 0).unwrap_err();
        assert!(matches!(err, ScenarioError::PackingFailure { what: "no-fly-zones", .. }));
    }

    #[test]
    fn validate_reports_overlap_and_gn_inside() {
        let mut s = default_scenario();
        s.nfzs = vec![
            Disk::new(Point2::new(0.0, 0.0), 50.0),
            Disk::new(Point2::new(60.0, 0.0), 50.0),
        ];
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("nfzs 0 and 1 overlap"), "{v:?}");

        let mut s2 = default_scenario();
        s2.nfzs = vec![Disk::new(Point2::new(0.0, 0.0), 50.0)];
        s2.gns = vec![Point2::new(10.0, 0.0)];
        let v2 = validate(&s2);
        assert_eq!(v2.len(), 1);
        assert!(v2[0].contains("gn 0 inside nfz 0"), "{v2:?}");
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("scn.json");
        let s = generate_random(&default_scenario(), 5, 40.0, 2, 3).unwrap();
        save(&s, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(s, loaded);
        // Save the loaded copy again: files must match byte for byte.
        let path2 = dir.path().join("scn2.json");
        save(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn load_rejects_malformed_and_unknown_and_missing() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");

        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load(&path), Err(ScenarioError::Parse { .. })));

        let s = default_scenario();
        save(&s, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        let with_unknown = text.replacen('{', "{\n  \"bogus\": 1,", 1);
        std::fs::write(&path, with_unknown).unwrap();
        match load(&path) {
            Err(ScenarioError::Parse { message, .. }) => assert!(message.contains("bogus")),
            other => panic!("expected parse error, got {other:?}"),
        }

        let without_sigma2: String =
            text.lines().filter(|l| !l.contains("sigma2_dbm")).collect::<Vec<_>>().join("\n");
        // Drop the trailing comma left on the previous line.
        let without_sigma2 = without_sigma2.replace("\"beta0_db\": -30.0,", "\"beta0_db\": -30.0,");
        std::fs::write(&path, fix_trailing_comma(&without_sigma2)).unwrap();
        match load(&path) {
            Err(ScenarioError::Parse { message, .. }) => {
                assert!(message.contains("sigma2_dbm"), "{message}");
            }
            other => panic!("expected schema error naming sigma2_dbm, got {other:?}"),
        }
    }

    /// Remove a dangling comma before a closing brace so the
    /// field-deletion test stays valid JSON.
    fn fix_trailing_comma(text: &str) -> String {
        let mut out = String::new();
        let lines: Vec<&str> = text.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            let next_closes = lines.get(i + 1).map(|l| l.trim_start().starts_with('}'));
            if next_closes == Some(true) && line.trim_end().ends_with(',') {
                out.push_str(line.trim_end().trim_end_matches(','));
            } else {
                out.push_str(line);
            }
            out.push('\n');
        }
        out
    }

    #[test]
    fn load_rejects_schema_version_mismatch() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v9.json");
        let s = default_scenario();
        save(&s, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load(&path),
            Err(ScenarioError::SchemaVersion { found: 9, expected: 1, .. })
        ));
    }

    #[test]
    fn db_conversions_round_trip() {
        for &dbm in &[20.0, -70.0, 3.3, -12.345, 0.0] {
            let w = dbm_to_watts(dbm);
            assert_eq!(dbm_to_watts(watts_to_dbm(w)), w);
        }
        for &db in &[-30.0, 4.7, 0.0, -99.9] {
            let lin = db_to_linear(db);
            assert_eq!(db_to_linear(linear_to_db(lin)), lin);
        }
        assert_eq!(dbm_to_watts(20.0), 0.1);
        assert_eq!(dbm_to_watts(-70.0), 1e-10);
        assert_eq!(db_to_linear(-30.0), 1e-3);
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = AlgoConfig::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.kappa, 1.2);
        assert_eq!(c.eta_max, 1e6);
        let bad = AlgoConfig { kappa: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
