//! Report directories: CSV series, the `summary.kv` verdict file, the
//! effective configuration, state snapshots and plot scripts.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::mms::MmsStudy;
use crate::phase::PhaseSample;
use crate::snapshot;
use crate::solver::DerivedEquation;
use crate::verify::{
    AprioriReport, Check, NormSample, NuLimitReport, RadiusSample, SpectrumRow, UniquenessReport,
};
use crate::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Aborted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Aborted => "ABORTED",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Aborted => 3,
        }
    }

    pub fn from_checks(checks: &[Check]) -> Self {
        if checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// A report directory owned by one experiment.
#[derive(Debug, Clone)]
pub struct ReportDir {
    path: PathBuf,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ReportDir {
    /// Creates `<base>/<experiment>-<stamp>`, adding `-1`, `-2`, ... if the
    /// name is taken.
    pub fn create(base: &Path, experiment: &str, stamp: &str) -> Result<Self> {
        fs::create_dir_all(base)?;
        let mut path = base.join(format!("{experiment}-{stamp}"));
        let mut n = 0;
        while path.exists() {
            n += 1;
            path = base.join(format!("{experiment}-{stamp}-{n}"));
        }
        fs::create_dir(&path)?;
        Ok(Self { path })
    }

    pub fn open(path: &Path) -> Self {
        Self {
            path: path.to_path_buf(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn table(
        &self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_config(&self, toml: &str) -> Result<()> {
        fs::write(self.path.join("config.toml"), toml)?;
        Ok(())
    }

    pub fn write_norms(&self, norms: &[NormSample]) -> Result<()> {
        self.table(
            "norms.csv",
            &["t", "norm_name", "value"],
            norms
                .iter()
                .map(|n| vec![n.t.to_string(), n.name.clone(), n.value.to_string()]),
        )
    }

    pub fn write_mu(&self, mu: &[PhaseSample]) -> Result<()> {
        self.table(
            "mu.csv",
            &["t", "mu", "mu_dot", "radius", "t_star_flag"],
            mu.iter().map(|s| {
                vec![
                    s.t.to_string(),
                    s.mu.to_string(),
                    s.mu_dot.to_string(),
                    s.radius.to_string(),
                    u8::from(s.t_star_reached).to_string(),
                ]
            }),
        )
    }

    pub fn write_apriori(&self, rows: &[AprioriReport]) -> Result<()> {
        self.table(
            "apriori.csv",
            &["t", "lhs", "rhs", "ratio", "theta_smallness", "trivial"],
            rows.iter().map(|r| {
                vec![
                    r.t.to_string(),
                    r.lhs.to_string(),
                    r.rhs.to_string(),
                    r.ratio.to_string(),
                    r.theta_smallness.to_string(),
                    u8::from(r.trivial).to_string(),
                ]
            }),
        )
    }

    pub fn write_radius(&self, rows: &[RadiusSample]) -> Result<()> {
        self.table(
            "radius.csv",
            &["t", "predicted", "measured_u", "measured_theta", "measured"],
            rows.iter().map(|r| {
                vec![
                    r.t.to_string(),
                    r.predicted.to_string(),
                    opt(r.measured_u),
                    opt(r.measured_theta),
                    opt(r.measured()),
                ]
            }),
        )
    }

    pub fn write_spectrum(&self, rows: &[SpectrumRow]) -> Result<()> {
        self.table(
            "spectrum.csv",
            &["t", "mode", "abs_xi", "amp_u", "amp_theta"],
            rows.iter().map(|r| {
                vec![
                    r.t.to_string(),
                    r.mode.to_string(),
                    r.abs_xi.to_string(),
                    r.amp_u.to_string(),
                    r.amp_theta.to_string(),
                ]
            }),
        )
    }

    pub fn write_uniqueness(&self, reports: &[UniquenessReport]) -> Result<()> {
        self.table(
            "uniqueness.csv",
            &[
                "sigma",
                "t",
                "mu1",
                "mu2",
                "m",
                "radius_hat",
                "diff_u",
                "diff_theta",
            ],
            reports.iter().flat_map(|r| {
                r.samples.iter().map(move |s| {
                    vec![
                        r.sigma.to_string(),
                        s.t.to_string(),
                        s.mu1.to_string(),
                        s.mu2.to_string(),
                        s.m.to_string(),
                        s.radius_hat.to_string(),
                        s.diff_u.to_string(),
                        s.diff_theta.to_string(),
                    ]
                })
            }),
        )
    }

    pub fn write_nu_limit(&self, r: &NuLimitReport) -> Result<()> {
        self.table(
            "nu_limit.csv",
            &["nu", "uniform_norm"],
            r.runs
                .iter()
                .map(|n| vec![n.nu.to_string(), n.uniform_norm.to_string()]),
        )?;
        self.table(
            "nu_differences.csv",
            &["nu_a", "nu_b", "difference"],
            r.runs
                .windows(2)
                .zip(&r.differences)
                .map(|(w, d)| vec![w[0].nu.to_string(), w[1].nu.to_string(), d.to_string()]),
        )
    }

    pub fn write_mms(&self, studies: &[&MmsStudy]) -> Result<()> {
        let mut header = vec!["study", "level", "h", "dt", "err_u", "err_theta"];
        let names: Vec<String> = DerivedEquation::ALL
            .iter()
            .map(|w| format!("res_{}", w.name()))
            .collect();
        header.extend(names.iter().map(String::as_str));
        header.push("wall_identity");
        let rows = studies.iter().flat_map(|s| {
            let label = match s.kind {
                crate::mms::Refinement::Space => "space",
                crate::mms::Refinement::Time => "time",
            };
            s.levels.iter().enumerate().map(move |(i, l)| {
                let mut r = vec![
                    label.to_string(),
                    i.to_string(),
                    l.h.to_string(),
                    l.dt.to_string(),
                    l.err_u.to_string(),
                    l.err_theta.to_string(),
                ];
                r.extend(l.residuals.iter().map(f64::to_string));
                r.push(l.wall.to_string());
                r
            })
        });
        self.table("mms.csv", &header, rows)
    }

    pub fn write_checks(&self, checks: &[Check]) -> Result<()> {
        self.table(
            "checks.csv",
            &["name", "value", "limit", "pass"],
            checks.iter().map(|c| {
                vec![
                    c.name.clone(),
                    c.value.to_string(),
                    c.limit.to_string(),
                    u8::from(c.pass).to_string(),
                ]
            }),
        )
    }

    /// Writes `summary.kv`: `experiment`, `status`, `exit_code`, then one
    /// `check.<name>` verdict with `value.<name>` and `limit.<name>` per
    /// check, then the extra `(key, value)` pairs in order.
    pub fn write_summary(
        &self,
        experiment: &str,
        status: Status,
        checks: &[Check],
        extra: &[(String, String)],
    ) -> Result<()> {
        let mut s = format!(
            "experiment={experiment}\nstatus={}\nexit_code={}\nchecks={}\n",
            status.as_str(),
            status.exit_code(),
            checks.len()
        );
        for c in checks {
            s.push_str(&format!(
                "check.{0}={1}\nvalue.{0}={2}\nlimit.{0}={3}\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.value,
                c.limit
            ));
        }
        for (k, v) in extra {
            s.push_str(&format!("{k}={v}\n"));
        }
        fs::write(self.path.join("summary.kv"), s)?;
        Ok(())
    }

    /// Writes `snapshots/u_<index>.bin` and `snapshots/theta_<index>.bin`.
    pub fn write_snapshots(&self, snaps: &[(Field, Field)]) -> Result<()> {
        if snaps.is_empty() {
            return Ok(());
        }
        let dir = self.path.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (i, (u, th)) in snaps.iter().enumerate() {
            fs::write(dir.join(format!("u_{i:05}.bin")), snapshot::encode(u))?;
            fs::write(dir.join(format!("theta_{i:05}.bin")), snapshot::encode(th))?;
        }
        Ok(())
    }
}

/// Scripts written by [`emit_plots`] and the CSVs that were absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotEmission {
    pub written: Vec<PathBuf>,
    pub missing: Vec<String>,
}

struct PlotSpec {
    script: &'static str,
    data: &'static str,
    title: &'static str,
    x: &'static str,
    y: &'static [&'static str],
    group: Option<&'static str>,
    yscale: &'static str,
}

const PLOTS: [PlotSpec; 7] = [
    PlotSpec {
        script: "norms.plot",
        data: "norms.csv",
        title: "norms vs t",
        x: "t",
        y: &["value"],
        group: Some("norm_name"),
        yscale: "log",
    },
    PlotSpec {
        script: "mu.plot",
        data: "mu.csv",
        title: "mu vs t",
        x: "t",
        y: &["mu", "radius"],
        group: None,
        yscale: "linear",
    },
    PlotSpec {
        script: "apriori.plot",
        data: "apriori.csv",
        title: "a priori lhs/rhs ratio vs t",
        x: "t",
        y: &["ratio"],
        group: None,
        yscale: "linear",
    },
    PlotSpec {
        script: "radius.plot",
        data: "radius.csv",
        title: "predicted and measured radius vs t",
        x: "t",
        y: &["predicted", "measured"],
        group: None,
        yscale: "linear",
    },
    PlotSpec {
        script: "spectrum.plot",
        data: "spectrum.csv",
        title: "spectrum decay vs |xi|",
        x: "abs_xi",
        y: &["amp_u", "amp_theta"],
        group: Some("t"),
        yscale: "log",
    },
    PlotSpec {
        script: "uniqueness.plot",
        data: "uniqueness.csv",
        title: "difference norms vs t",
        x: "t",
        y: &["diff_u", "diff_theta"],
        group: Some("sigma"),
        yscale: "log",
    },
    PlotSpec {
        script: "nu_limit.plot",
        data: "nu_differences.csv",
        title: "successive viscosity differences",
        x: "nu_b",
        y: &["difference"],
        group: None,
        yscale: "log",
    },
];

/// Writes one `key=value` plot script per CSV series present in `dir`.
/// Absent series are listed in `missing`.
pub fn emit_plots(dir: &Path) -> Result<PlotEmission> {
    let mut out = PlotEmission::default();
    for p in &PLOTS {
        if !dir.join(p.data).is_file() {
            out.missing.push(p.data.to_string());
            continue;
        }
        let mut s = format!(
            "title={}\ndata={}\nx={}\ny={}\n",
            p.title,
            p.data,
            p.x,
            p.y.join(",")
        );
        if let Some(g) = p.group {
            s.push_str(&format!("group={g}\n"));
        }
        s.push_str(&format!("xscale=linear\nyscale={}\n", p.yscale));
        let path = dir.join(p.script);
        fs::write(&path, s)?;
        out.written.push(path);
    }
    Ok(out)
}
