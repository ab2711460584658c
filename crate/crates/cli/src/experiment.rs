//! Builds the configured system and partition and runs every suite.

use std::collections::BTreeMap;

use serde::Serialize;

use phasecover::atomic::{check_domination, kernel_envelope, MoleculeSystem};
use phasecover::cover::{approx_error_certificate, build_bupu, doubling_radii, grid_centers, probe_set, CertificateSetup, PartitionOfUnity};
use phasecover::format::fmt_num;
use phasecover::frames::{LocalizedFrame, DEFAULT_DECAY, DEFAULT_STRENGTH};
use phasecover::gabor::{default_lattice, gaussian_window, GaborSystem};
use phasecover::group::{Neighborhood, RelSepSet};
use phasecover::linalg;
use phasecover::multiplier::{approx_multiplier_error, multiplier_dense, norm_equivalence_report, span_trials, EquivalenceRow, InverseMultiplier, SymbolMask};
use phasecover::spaces::SolidSpaceSpec;
use phasecover::weight::Weight;

use crate::config::{ExperimentConfig, MaskSpec, SpaceEntry, SystemSpec, VERSION};
use crate::CliError;

pub const IDEMPOTENCE_TOL: f64 = 1e-10;
pub const DOMINATION_TOL: f64 = 1e-12;
pub const INVERSE_TOL: f64 = 1e-8;
/// Empirical error may exceed the proof-side bound by at most this factor.
pub const CERTIFICATE_SLACK: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suite {
    pub pass: bool,
    pub value: f64,
}

/// Everything a run writes, keyed by path relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
    pub suites: BTreeMap<String, Suite>,
    pub config_hash: String,
}

impl Artifacts {
    pub fn all_pass(&self) -> bool {
        self.suites.values().all(|s| s.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.suites
            .iter()
            .filter(|(_, s)| !s.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

fn numeric(e: phasecover::Error) -> CliError {
    CliError::Numeric(e.to_string())
}

pub fn build_system(cfg: &ExperimentConfig) -> Result<MoleculeSystem, CliError> {
    let g = cfg.carrier.group()?;
    match &cfg.system {
        SystemSpec::Gabor { a, b, sigma } => {
            let n = g.modulus().expect("validated") as usize;
            let a = a.unwrap_or_else(|| default_lattice(n));
            let b = b.unwrap_or(a);
            let h = gaussian_window(n, sigma.unwrap_or(1.0));
            Ok(GaborSystem::new(&h, a, b).map_err(numeric)?.into_molecules())
        }
        SystemSpec::LocalizedFrame { radius, strength, decay } => LocalizedFrame::exponential(
            *radius,
            strength.unwrap_or(DEFAULT_STRENGTH),
            decay.unwrap_or(DEFAULT_DECAY),
            cfg.seed,
        )
        .and_then(|fr| fr.coefficient_system())
        .map_err(numeric),
        SystemSpec::Delta => {
            let nodes = RelSepSet::with_default_neighborhood(g, g.elements().expect("validated finite")).map_err(numeric)?;
            MoleculeSystem::deltas(nodes).map_err(numeric)
        }
        SystemSpec::Block { width } => {
            MoleculeSystem::block_indicators(g.modulus().expect("validated"), *width).map_err(numeric)
        }
    }
}

pub fn build_partition(cfg: &ExperimentConfig, sys: &MoleculeSystem) -> Result<PartitionOfUnity, CliError> {
    let dom = sys.domain();
    let centers = grid_centers(dom, cfg.partition.spacing).map_err(numeric)?;
    build_bupu(dom, centers, cfg.partition.profile, cfg.partition.width).map_err(numeric)
}

pub fn space(entry: &SpaceEntry, shared: &Weight) -> Result<SolidSpaceSpec, CliError> {
    let w = entry.weight.clone().unwrap_or_else(|| shared.clone());
    let s = match entry.q {
        None => SolidSpaceSpec::lp(entry.p.0, w),
        Some(q) => SolidSpaceSpec::mixed(entry.p.0, q.0, w, 1),
    };
    s.map(|s| s.with_reference(shared.clone())).map_err(numeric)
}

pub fn mask(spec: Option<&MaskSpec>, sys: &MoleculeSystem) -> SymbolMask {
    let dom = sys.domain();
    match spec {
        None => SymbolMask::constant(dom, 1.0),
        Some(MaskSpec::Constant { value }) => SymbolMask::constant(dom, *value),
        Some(MaskSpec::HalfPlane) => SymbolMask::half_plane(dom),
        Some(MaskSpec::Cosine { offset, amplitude }) => SymbolMask::cosine(dom, *offset, *amplitude),
    }
}

fn exp_cell(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn equivalence_lines(out: &mut String, hash: &str, partition: &str, rows: &[EquivalenceRow]) {
    for (k, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{hash},{partition},{k},{},{},{},{},{},{},{}\n",
            exp_cell(r.p),
            exp_cell(r.q),
            r.weight,
            r.trial_count,
            fmt_num(r.c_min),
            fmt_num(r.c_max),
            fmt_num(r.ratio)
        ));
    }
}

fn spread_ok(rows: &[EquivalenceRow]) -> bool {
    rows.iter()
        .all(|r| r.trial_count > 0 && r.c_min > 0.0 && r.c_min <= r.c_max && r.c_max.is_finite())
}

/// Runs every suite and renders the output files in memory.
pub fn compute(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let sys = build_system(cfg)?;
    let g = sys.group();
    let v = Neighborhood::box_radius(g, cfg.carrier.neighborhood_radius);
    let w = &cfg.weight;
    let spaces = cfg.spaces.iter().map(|s| space(s, w)).collect::<Result<Vec<_>, _>>()?;
    let b = space(&cfg.coefficient_space, w)?;
    let pu = build_partition(cfg, &sys)?;
    let kernel = kernel_envelope(&sys, &v, w).map_err(numeric)?;
    let radii = doubling_radii(cfg.exhaustion.initial_radius, cfg.exhaustion.doublings);

    let mut suites = BTreeMap::new();
    let mut suite = |name: &str, pass: bool, value: f64| {
        suites.insert(name.to_string(), Suite { pass, value });
    };

    let (idem, adj) = sys.projector_defects();
    suite("projector_idempotent", idem <= IDEMPOTENCE_TOL, idem);
    if sys.canonical_dual() {
        suite("projector_self_adjoint", adj <= IDEMPOTENCE_TOL, adj);
    }
    let env = sys.envelope_report();
    suite("envelope", env.ok, env.worst_excess);
    let dom_report = check_domination(&sys, &kernel, cfg.trials, cfg.seed);
    suite("domination", dom_report.worst_excess <= DOMINATION_TOL, dom_report.worst_excess);
    let (fa, fb) = sys.frame_bounds();
    suite("frame_bounds", fa > 0.0 && fb.is_finite(), fa / fb);

    // certificate per space
    let mut certificate = String::from("config_hash,space_index,radius,empirical_opnorm,theory_bound\n");
    let mut first_rows = None;
    let mut monotone = true;
    let mut bracketed = true;
    for (k, e) in spaces.iter().enumerate() {
        let cert = approx_error_certificate(
            &sys,
            &pu,
            &CertificateSetup {
                space: e,
                neighborhood: &v,
                weight: w,
                kernel: &kernel,
                radii: &radii,
                random_probes: cfg.probes,
                seed: cfg.seed,
            },
        )
        .map_err(numeric)?;
        for r in &cert.rows {
            certificate.push_str(&format!(
                "{hash},{k},{},{},{}\n",
                r.radius,
                fmt_num(r.empirical_opnorm),
                fmt_num(r.theory_bound)
            ));
        }
        monotone &= cert.rows.windows(2).all(|p| p[1].theory_bound <= p[0].theory_bound);
        if w.is_unit() {
            bracketed &= cert
                .rows
                .iter()
                .all(|r| r.empirical_opnorm <= CERTIFICATE_SLACK * r.theory_bound + 1e-12);
        }
        first_rows.get_or_insert(cert.rows);
    }
    let first_rows = first_rows.expect("spaces validated nonempty");
    suite("certificate_monotone", monotone, first_rows.last().map_or(0.0, |r| r.theory_bound));
    if w.is_unit() {
        suite("certificate_bracketed", bracketed, first_rows.last().map_or(0.0, |r| r.empirical_opnorm));
    }

    // equivalence
    let trials = span_trials(&sys, cfg.trials, cfg.seed);
    let eta = norm_equivalence_report(&sys, &pu, &spaces, &b, &v, &trials).map_err(numeric)?;
    let mut equivalence =
        String::from("config_hash,partition,space_index,p,q,weight,trial_count,c_min,c_max,ratio\n");
    equivalence_lines(&mut equivalence, &hash, "eta", &eta.rows);
    suite(
        "equivalence",
        spread_ok(&eta.rows),
        eta.rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
    );

    let m = mask(cfg.partition.mask.as_ref(), &sys);
    if cfg.partition.mask.is_some() {
        if let Some((lo, hi)) = m.positive_bounds() {
            let theta = pu.modulate(&m.to_gfunc()).map_err(numeric)?;
            let report = norm_equivalence_report(&sys, &theta, &spaces, &b, &v, &trials).map_err(numeric)?;
            equivalence_lines(&mut equivalence, &hash, "theta", &report.rows);
            suite(
                "theta_equivalence",
                spread_ok(&report.rows),
                report.rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
            );
            let inv = InverseMultiplier::new(&sys, &m, w).map_err(numeric)?;
            let worst = trials
                .iter()
                .filter(|f| linalg::vec_norm(f) > 0.0)
                .map(|f| {
                    let back = inv.apply_dense(&sys, &multiplier_dense(&sys, &m, f));
                    linalg::vec_dist(&back, f) / linalg::vec_norm(f)
                })
                .fold(0.0, f64::max);
            suite("inverse_multiplier", worst <= INVERSE_TOL, worst);
            let (fa, fb) = sys.frame_bounds();
            let need = 0.3 * inv.gram.sigma_max * (lo / hi) * (fa / fb);
            suite("gram_gap", inv.gram.spectral_gap >= need, inv.gram.spectral_gap);
        }
    }

    // error-vs-U curves
    let probes = probe_set(&sys, cfg.probes, cfg.seed);
    let merr = approx_multiplier_error(&sys, &pu, &m, &radii, &probes).map_err(numeric)?;
    let unit = approx_multiplier_error(&sys, &pu, &SymbolMask::constant(sys.domain(), 1.0), &radii, &probes)
        .map_err(numeric)?;
    let mut plot = String::from(
        "config_hash,radius,projector_error,theory_bound,multiplier_error,unit_multiplier_error\n",
    );
    for ((c, me), ue) in first_rows.iter().zip(&merr).zip(&unit) {
        plot.push_str(&format!(
            "{hash},{},{},{},{},{}\n",
            c.radius,
            fmt_num(c.empirical_opnorm),
            fmt_num(c.theory_bound),
            fmt_num(me.probe_norm),
            fmt_num(ue.probe_norm)
        ));
    }

    let mut files = BTreeMap::new();
    files.insert("certificate.csv".to_string(), certificate);
    files.insert("equivalence.csv".to_string(), equivalence);
    files.insert("plotdata/error_vs_u.csv".to_string(), plot);
    files.insert("invariants.json".to_string(), invariants_json(&hash, cfg, &suites));
    Ok(Artifacts {
        files,
        suites,
        config_hash: hash,
    })
}

fn invariants_json(hash: &str, cfg: &ExperimentConfig, suites: &BTreeMap<String, Suite>) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        config_hash: &'a str,
        name: &'a str,
        version: &'a str,
        seed: u64,
        pass: bool,
        suites: BTreeMap<&'a str, SuiteDoc>,
    }
    #[derive(Serialize)]
    struct SuiteDoc {
        pass: bool,
        value: String,
    }
    let doc = Doc {
        config_hash: hash,
        name: &cfg.name,
        version: VERSION,
        seed: cfg.seed,
        pass: suites.values().all(|s| s.pass),
        suites: suites
            .iter()
            .map(|(k, s)| {
                (
                    k.as_str(),
                    SuiteDoc {
                        pass: s.pass,
                        value: fmt_num(s.value),
                    },
                )
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}
