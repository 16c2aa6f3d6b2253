use std::sync::Arc;
use std::time::Instant;

use super::budget::{Sample, Series};
use super::cache::SpectrumCache;
use super::config::{Experiment, ExperimentConfig, Exponent, Validated};
use super::report::{
    BllRecord, Check, DomainReport, ExperimentReport, FunctionalSeries, PerronEntry, Stage,
    Verdict, ZetaRow,
};
use super::{HarnessError, RunOutcome, SpectrumArtifact};
use crate::geometry::{rasterize, symmetrization_sequence, Domain, Triangle};
use crate::kernel::Kernel;
use crate::spectral::{
    estimate_schatten_index, heat_sum, perron_check, resolvent_sum, schatten_norm, shifted_sum,
    Spectrum, ZetaProbe,
};
use crate::trace::bll_compare;

/// Largest tolerated ζ = 0 residual in the ζ-kernel table.
const ZETA0_LIMIT: f64 = 1e-8;
/// Largest tolerated relative area drift along a symmetrization sequence.
const AREA_DRIFT_LIMIT: f64 = 1e-10;
/// Shift powers `n` of the shifted sums.
const SHIFT_POWERS: [u32; 3] = [1, 2, 3];
/// Verdict threshold for Monte Carlo comparisons, in combined standard errors.
const MC_SIGMAS: f64 = 3.0;

/// Ten log-spaced heat times from 0.1 to 10.
pub fn default_t_list() -> Vec<f64> {
    (0..10).map(|k| 0.1 * 100f64.powf(k as f64 / 9.0)).collect()
}

/// Fifty shifts from −0.9 to 3, in units of `μ₁` of the ball.
pub fn default_zeta_sweep() -> Vec<f64> {
    (0..50).map(|k| -0.9 + 3.9 * k as f64 / 49.0).collect()
}

fn default_resolvent_grid() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 / 10.0).collect()
}

/// `<kind><index>`, e.g. `box0`, `triangle2`.
pub fn domain_label(domain: &Domain, index: usize) -> String {
    let kind = match domain {
        Domain::Ball { .. } => "ball",
        Domain::Box { .. } => "box",
        Domain::Triangle(_) => "triangle",
        Domain::Polygon(_) => "polygon",
    };
    format!("{kind}{index}")
}

fn p_name(p: Exponent) -> String {
    format!("norm[p={p}]")
}

pub(super) struct Context {
    cfg: ExperimentConfig,
    v: Validated,
    cache: SpectrumCache,
    report: ExperimentReport,
    spectra: Vec<SpectrumArtifact>,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, v: Validated) -> Self {
        Self {
            cache: SpectrumCache::new(v.kernel.clone()),
            report: ExperimentReport::new(cfg.clone()),
            cfg,
            v,
            spectra: vec![],
        }
    }

    pub fn finish(self) -> RunOutcome {
        RunOutcome {
            report: self.report,
            spectra: self.spectra,
        }
    }

    pub fn dispatch(&mut self) -> Result<(), HarnessError> {
        match self.cfg.experiment {
            Experiment::Rfk => self.verify_rfk(),
            Experiment::Schatten => self.verify_schatten(),
            Experiment::Triangle => self.verify_triangle(),
            Experiment::Steiner => self.verify_steiner(),
            Experiment::Bll => self.verify_bll(),
            Experiment::Zeta => self.verify_zeta(),
            Experiment::Convergence => self.convergence(),
        }
    }

    fn stage<T>(
        &mut self,
        name: String,
        f: impl FnOnce(&mut Self) -> Result<T, HarnessError>,
    ) -> Result<T, HarnessError> {
        let start = Instant::now();
        let out = f(self);
        self.report.runtime.stages.push(Stage {
            name,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn target_measure(&self) -> Result<f64, HarnessError> {
        match self.cfg.measure {
            Some(m) => Ok(m),
            None => Ok(self.v.domains[0].measure()?),
        }
    }

    /// Config domains rescaled about their centroids to the common measure.
    fn rescaled_domains(&self) -> Result<Vec<(String, Domain)>, HarnessError> {
        let m = self.target_measure()?;
        self.v
            .domains
            .iter()
            .enumerate()
            .map(|(i, d)| Ok((domain_label(d, i), d.with_measure(m)?)))
            .collect()
    }

    /// Spectra of `domain` at every configured resolution, with `μ₁` and the
    /// Schatten norms for `ps` tracked as series.
    fn study(
        &mut self,
        label: &str,
        role: &str,
        domain: &Domain,
        ps: &[Exponent],
        vectors: bool,
    ) -> Result<(DomainReport, Vec<Arc<Spectrum>>), HarnessError> {
        let resolutions = self.cfg.resolutions.clone();
        self.stage(format!("spectra {label}"), |ctx| {
            let mut spectra = vec![];
            let mut levels = vec![];
            let mut mu1 = vec![];
            let mut norms = vec![vec![]; ps.len()];
            let mut perron = vec![];
            for &n in &resolutions {
                let (s, res) = ctx.cache.get(domain, n, vectors)?;
                let m = s.mu1().ok_or_else(|| {
                    HarnessError::Numerical(format!("{label}: no positive eigenvalue at n = {n}"))
                })?;
                mu1.push(Sample { n, value: m });
                for (k, &p) in ps.iter().enumerate() {
                    norms[k].push(Sample {
                        n,
                        value: schatten_norm(&s, p.0)?.value,
                    });
                }
                if vectors {
                    perron.push(PerronEntry {
                        n,
                        report: perron_check(&s)?,
                    });
                }
                levels.push(res);
                ctx.spectra.push(SpectrumArtifact {
                    label: label.to_string(),
                    n,
                    spectrum: s.clone(),
                });
                spectra.push(s);
            }
            let mut series = vec![Series::new("mu1", mu1)];
            for (k, &p) in ps.iter().enumerate() {
                series.push(Series::new(p_name(p), std::mem::take(&mut norms[k])));
            }
            let report = DomainReport {
                label: label.to_string(),
                role: role.to_string(),
                domain: domain.to_string(),
                measure: domain.measure()?,
                resolutions: levels,
                series,
                perron,
                index_estimate: spectra.last().and_then(|s| estimate_schatten_index(s).ok()),
                functionals: vec![],
            };
            Ok((report, spectra))
        })
    }

    fn scale(&self) -> f64 {
        self.cfg.budget_scale
    }

    fn index_note(&mut self) {
        if let Some(h) = self.v.kernel.index_hint() {
            self.report.notes.push(format!(
                "Schatten index hint for {}: threshold {} ({}), p0 = {}",
                self.v.kernel.label,
                h.threshold,
                if h.attained {
                    "attained"
                } else {
                    "not attained"
                },
                h.p0()
            ));
        }
    }

    /// `μ₁(B) ≤ μ₁(Ω)` for each domain against the equimeasure ball.
    fn verify_rfk(&mut self) -> Result<(), HarnessError> {
        let domains = self.rescaled_domains()?;
        let ball = domains[0].1.equimeasure_ball()?;
        let (b, _) = self.study("ball", "ball", &ball, &[], true)?;
        self.perron_checks(&b);
        for (label, d) in &domains {
            let (o, _) = self.study(label, "competitor", d, &[], true)?;
            self.perron_checks(&o);
            self.report.verdicts.push(Verdict::dominates(
                format!("mu1({label}) >= mu1(ball)"),
                (label, o.series("mu1").unwrap()),
                ("ball", b.series("mu1").unwrap()),
                self.scale(),
            ));
            self.report.domains.push(o);
        }
        self.report.domains.insert(0, b);
        Ok(())
    }

    fn perron_checks(&mut self, d: &DomainReport) {
        for e in &d.perron {
            self.report.checks.push(Check {
                name: format!("perron({}, n={}): simple and sign-consistent", d.label, e.n),
                passed: e.report.simple && e.report.sign_consistent,
                value: e.report.gap,
                limit: 1e-10,
            });
        }
    }

    /// `‖K_B‖_p ≥ ‖K_Ω‖_p` for each domain and exponent, plus the spectral
    /// functionals for the exponents in `functional_p`.
    fn verify_schatten(&mut self) -> Result<(), HarnessError> {
        self.index_note();
        let ps = self.cfg.p_list.clone();
        let p0 = self.v.kernel.index_hint().map(|h| h.p0());
        let domains = self.rescaled_domains()?;
        let ball = domains[0].1.equimeasure_ball()?;
        let (mut b, b_spectra) = self.study("ball", "ball", &ball, &ps, false)?;
        let zeta_unit = b.series("mu1").and_then(|s| s.finest()).unwrap();
        let mut ball_functionals_done = false;
        let mut others = vec![];
        for (label, d) in &domains {
            let (mut o, o_spectra) = self.study(label, "competitor", d, &ps, false)?;
            for &p in &ps {
                let name = p_name(p);
                let mut v = Verdict::dominates(
                    format!("||K_ball||_{p} >= ||K_{label}||_{p}"),
                    ("ball", b.series(&name).unwrap()),
                    (label, o.series(&name).unwrap()),
                    self.scale(),
                );
                if p0.is_some_and(|p0| p.0 < p0 as f64) {
                    v = v.flag("below_p0");
                }
                if self
                    .v
                    .kernel
                    .index_hint()
                    .is_some_and(|h| !p.is_infinite() && !h.converges(p.0))
                {
                    v = v.flag("divergence_caveat");
                }
                self.report.verdicts.push(v);
            }
            if !self.cfg.functional_p.is_empty() {
                if !ball_functionals_done {
                    b.functionals = self.functional_series(&b_spectra, zeta_unit)?;
                    ball_functionals_done = true;
                }
                o.functionals = self.functional_series(&o_spectra, zeta_unit)?;
                self.functional_verdicts(&b, &o);
            }
            others.push(o);
        }
        if !self.cfg.functional_p.is_empty() {
            self.report
                .notes
                .push(format!("functional shifts are multiples of mu1(ball) = {zeta_unit} at the finest resolution"));
        }
        self.report.domains.push(b);
        self.report.domains.extend(others);
        Ok(())
    }

    fn heat_grid(&self) -> Vec<f64> {
        if self.cfg.t_list.is_empty() {
            default_t_list()
        } else {
            self.cfg.t_list.clone()
        }
    }

    fn resolvent_grid(&self) -> Vec<f64> {
        if self.cfg.zeta_list.is_empty() {
            default_resolvent_grid()
        } else {
            self.cfg
                .zeta_list
                .iter()
                .copied()
                .filter(|f| f.abs() < 1.0)
                .collect()
        }
    }

    fn shift_grid(&self) -> Vec<f64> {
        if self.cfg.zeta_list.is_empty() {
            default_zeta_sweep()
        } else {
            self.cfg
                .zeta_list
                .iter()
                .copied()
                .filter(|&f| f > -1.0)
                .collect()
        }
    }

    /// Heat, resolvent and shifted sums over the configured grids, one
    /// series per grid point across resolutions.
    fn functional_series(
        &self,
        spectra: &[Arc<Spectrum>],
        zeta_unit: f64,
    ) -> Result<Vec<FunctionalSeries>, HarnessError> {
        let ns = &self.cfg.resolutions;
        let mut out = vec![];
        let mut push = |functional: &str,
                        p: u32,
                        shift: Option<u32>,
                        x: f64,
                        f: &dyn Fn(&Spectrum) -> Result<f64, HarnessError>|
         -> Result<(), HarnessError> {
            let samples = ns
                .iter()
                .zip(spectra)
                .map(|(&n, s)| Ok(Sample { n, value: f(s)? }))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            out.push(FunctionalSeries {
                functional: functional.to_string(),
                p,
                shift_power: shift,
                x,
                series: Series::new(functional, samples),
            });
            Ok(())
        };
        for &p in &self.cfg.functional_p {
            for t in self.heat_grid() {
                push("heat_sum", p, None, t, &|s| Ok(heat_sum(s, p, t)?))?;
            }
            for f in self.resolvent_grid() {
                let z = f * zeta_unit;
                push("resolvent_sum", p, None, z, &|s| {
                    Ok(resolvent_sum(s, p, z)?)
                })?;
            }
            for n in SHIFT_POWERS {
                for f in self.shift_grid() {
                    let z = f * zeta_unit;
                    push("shifted_sum", p, Some(n), z, &|s| {
                        Ok(shifted_sum(s, p, n, z)?)
                    })?;
                }
            }
        }
        Ok(out)
    }

    /// One verdict per functional family: the grid point with the least slack
    /// `margin + budget` stands for the whole grid.
    fn functional_verdicts(&mut self, b: &DomainReport, o: &DomainReport) {
        let mut families: Vec<(String, u32, Option<u32>)> = vec![];
        for f in &b.functionals {
            let key = (f.functional.clone(), f.p, f.shift_power);
            if !families.contains(&key) {
                families.push(key);
            }
        }
        for (name, p, shift) in families {
            let pairs: Vec<(&FunctionalSeries, &FunctionalSeries)> = b
                .functionals
                .iter()
                .zip(&o.functionals)
                .filter(|(x, _)| x.functional == name && x.p == p && x.shift_power == shift)
                .collect();
            let mut worst: Option<Verdict> = None;
            let mut decisive = 0;
            for (fb, fo) in &pairs {
                let v = Verdict::dominates(
                    String::new(),
                    ("ball", &fb.series),
                    (&o.label, &fo.series),
                    self.scale(),
                )
                .with("x", fb.x);
                decisive += v.decisive as usize;
                if worst
                    .as_ref()
                    .is_none_or(|w| v.margin + v.error_budget < w.margin + w.error_budget)
                {
                    worst = Some(v);
                }
            }
            let Some(mut v) = worst else { continue };
            let (what, var) = match (name.as_str(), shift) {
                ("shifted_sum", Some(n)) => (format!("F_{n}[p={p}](ball vs {})", o.label), "zeta"),
                ("heat_sum", _) => (
                    format!("heat_sum[p={p}](ball) - heat_sum[p={p}]({})", o.label),
                    "t",
                ),
                _ => (
                    format!("{name}[p={p}](ball) - {name}[p={p}]({})", o.label),
                    "zeta",
                ),
            };
            v.claim = format!("{what} >= 0 for every {var} on the grid (worst point shown)");
            v = v
                .with("grid_points", pairs.len() as f64)
                .with("decisive_points", decisive as f64);
            self.report.verdicts.push(v);
        }
    }

    /// Equilateral triangle against each triangle of the same area.
    fn verify_triangle(&mut self) -> Result<(), HarnessError> {
        let ps = self.cfg.p_list.clone();
        let area = self.target_measure()?;
        let reference = match &self.v.reference {
            Some(r) => r.with_measure(area)?,
            None => Domain::Triangle(Triangle::equilateral(area)?),
        };
        let (r, _) = self.study("reference", "reference", &reference, &ps, false)?;
        let domains = self.rescaled_domains()?;
        let mut others = vec![];
        for (label, d) in &domains {
            let (o, _) = self.study(label, "competitor", d, &ps, false)?;
            self.report.verdicts.push(Verdict::dominates(
                format!("mu1({label}) >= mu1(reference)"),
                (label, o.series("mu1").unwrap()),
                ("reference", r.series("mu1").unwrap()),
                self.scale(),
            ));
            for &p in &ps {
                let name = p_name(p);
                self.report.verdicts.push(Verdict::dominates(
                    format!("||K_reference||_{p} >= ||K_{label}||_{p}"),
                    ("reference", r.series(&name).unwrap()),
                    (label, o.series(&name).unwrap()),
                    self.scale(),
                ));
            }
            others.push(o);
        }
        self.report.domains.push(r);
        self.report.domains.extend(others);
        Ok(())
    }

    /// Schatten norms along a Steiner symmetrization sequence.
    fn verify_steiner(&mut self) -> Result<(), HarnessError> {
        let ps = self.cfg.p_list.clone();
        let start = *self.v.domains[0].as_triangle().unwrap();
        let settings = self.cfg.steiner;
        let seq = symmetrization_sequence(&start, settings.tol, settings.max_steps)?;
        let a0 = start.area();
        let mut drift = 0.0f64;
        let mut prev: Option<DomainReport> = None;
        for (k, t) in seq.triangles.iter().enumerate() {
            drift = drift.max((t.area() - a0).abs() / a0);
            let label = format!("step{k:02}");
            let (d, _) = self.study(&label, "sequence", &Domain::Triangle(*t), &ps, false)?;
            if let Some(pr) = &prev {
                for &p in &ps {
                    let name = p_name(p);
                    self.report.verdicts.push(Verdict::dominates(
                        format!("||K_{label}||_{p} >= ||K_{}||_{p}", pr.label),
                        (&label, d.series(&name).unwrap()),
                        (&pr.label, pr.series(&name).unwrap()),
                        self.scale(),
                    ));
                }
            }
            if let Some(pr) = prev.replace(d) {
                self.report.domains.push(pr);
            }
        }
        self.report.domains.extend(prev);
        let last = seq.triangles.last().unwrap();
        self.report.checks.push(Check {
            name: "sequence converged".into(),
            passed: seq.converged,
            value: (seq.triangles.len() - 1) as f64,
            limit: settings.max_steps as f64,
        });
        self.report.checks.push(Check {
            name: "final side-length spread".into(),
            passed: last.side_spread() < settings.tol,
            value: last.side_spread(),
            limit: settings.tol,
        });
        self.report.checks.push(Check {
            name: "relative area drift".into(),
            passed: drift <= AREA_DRIFT_LIMIT,
            value: drift,
            limit: AREA_DRIFT_LIMIT,
        });
        Ok(())
    }

    /// Monte Carlo cyclic integrals over each domain against its equimeasure ball.
    fn verify_bll(&mut self) -> Result<(), HarnessError> {
        let domains = self.rescaled_domains()?;
        let ps: Vec<u32> = self
            .cfg
            .p_list
            .iter()
            .filter_map(|p| p.as_integer())
            .collect();
        for (label, d) in &domains {
            for &p in &ps {
                let (n, seed) = (self.cfg.n_samples, self.cfg.seed);
                let kernel = self.v.kernel.clone();
                let cmp = self.stage(format!("monte carlo {label} p={p}"), |_| {
                    Ok(bll_compare(d, &kernel, p, n, seed)?)
                })?;
                let se = cmp.ball.stderr.hypot(cmp.omega.stderr);
                let v = Verdict::new(
                    format!("cyclic_{p}(ball) >= cyclic_{p}({label})"),
                    cmp.ball.value - cmp.omega.value,
                    MC_SIGMAS * se * self.scale(),
                )
                .with("ball", cmp.ball.value)
                .with("ball:stderr", cmp.ball.stderr)
                .with(label.as_str(), cmp.omega.value)
                .with(format!("{label}:stderr"), cmp.omega.stderr)
                .with("dominance_z", cmp.dominance_z);
                self.report.verdicts.push(v);
                self.report.monte_carlo.push(BllRecord {
                    label: label.clone(),
                    p,
                    comparison: cmp,
                });
            }
        }
        Ok(())
    }

    /// Residual table of the shifted Peierls kernel; report-only apart from
    /// the ζ = 0 column, which is the eigen equation itself.
    fn verify_zeta(&mut self) -> Result<(), HarnessError> {
        let Kernel::Peierls { b } = self.v.kernel.kernel else {
            unreachable!("validated")
        };
        let domains: Vec<(String, Domain)> = match self.cfg.measure {
            Some(_) => self.rescaled_domains()?,
            None => self
                .v
                .domains
                .iter()
                .enumerate()
                .map(|(i, d)| (domain_label(d, i), d.clone()))
                .collect(),
        };
        let mut zetas = vec![0.0];
        zetas.extend(self.cfg.zeta_list.iter().copied().filter(|&z| z != 0.0));
        let indices = self.cfg.eigen_indices.clone();
        let max_index = *indices.iter().max().unwrap();
        let mut worst0 = 0.0f64;
        for (label, d) in &domains {
            for n in self.cfg.resolutions.clone() {
                let rows = self.stage(format!("zeta {label} n={n}"), |_| {
                    let raster = rasterize(d, n)?;
                    let probe = ZetaProbe::new(&raster, b, max_index)?;
                    let mut rows = vec![];
                    for &z in &zetas {
                        for r in probe.residuals(z, &indices)? {
                            rows.push(ZetaRow {
                                domain: label.clone(),
                                n,
                                zeta: r.zeta,
                                index: r.index,
                                mu: r.mu,
                                residual: r.residual,
                            });
                        }
                    }
                    Ok(rows)
                })?;
                for r in rows.iter().filter(|r| r.zeta == 0.0) {
                    worst0 = worst0.max(r.residual);
                }
                self.report.zeta_table.extend(rows);
            }
        }
        self.report.checks.push(Check {
            name: "zeta = 0 residual meets the eigen-residual bound".into(),
            passed: worst0 <= ZETA0_LIMIT,
            value: worst0,
            limit: ZETA0_LIMIT,
        });
        self.report
            .notes
            .push("residuals for zeta > 0 are data only; no pass/fail threshold is applied".into());
        Ok(())
    }

    /// Per-domain convergence data; no verdicts.
    fn convergence(&mut self) -> Result<(), HarnessError> {
        self.index_note();
        let ps = self.cfg.p_list.clone();
        let domains: Vec<(String, Domain)> = match self.cfg.measure {
            Some(_) => self.rescaled_domains()?,
            None => self
                .v
                .domains
                .iter()
                .enumerate()
                .map(|(i, d)| (domain_label(d, i), d.clone()))
                .collect(),
        };
        for (label, d) in &domains {
            let (r, _) = self.study(label, "domain", d, &ps, false)?;
            self.report.domains.push(r);
        }
        Ok(())
    }
}
