use std::fs;
use std::path::Path;

use blgv_core::config::RunConfig;
use blgv_core::report::{emit_plots, ReportDir, Status};
use blgv_core::snapshot;
use blgv_core::solver::make_initial_data_with;
use blgv_core::verify::{monitored_run, Check};

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn shipped_configs_parse() {
    let canon = RunConfig::load(&configs().join("canonical.toml")).unwrap();
    assert_eq!(
        canon,
        RunConfig {
            grid: blgv_core::config::GridConfig {
                ymax: Some(10.0),
                ..Default::default()
            },
            ..Default::default()
        }
    );
    let quick = RunConfig::load(&configs().join("quick.toml")).unwrap();
    assert_eq!(quick.grid.nx, 16);
}

#[test]
fn run_report_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&configs().join("quick.toml")).unwrap();
    let dir = ReportDir::create(tmp.path(), "run", "stamp").unwrap();
    let again = ReportDir::create(tmp.path(), "run", "stamp").unwrap();
    assert!(dir.path().ends_with("run-stamp"));
    assert!(again.path().ends_with("run-stamp-1"));

    let data = make_initial_data_with(&cfg.build_grid().unwrap(), &cfg.generator()).unwrap();
    let rec = monitored_run(&data, &cfg.run_params()).unwrap();
    dir.write_config(&cfg.to_toml()).unwrap();
    dir.write_norms(&rec.norms).unwrap();
    dir.write_mu(&rec.mu).unwrap();
    dir.write_apriori(&rec.apriori).unwrap();
    dir.write_radius(&rec.radius).unwrap();
    dir.write_spectrum(&rec.spectrum).unwrap();
    dir.write_snapshots(&rec.snapshots).unwrap();
    let checks = vec![
        Check::at_most("ratio", 1.5, 2.0),
        Check::at_least("floor", 0.2, 0.5),
    ];
    dir.write_checks(&checks).unwrap();
    let status = Status::from_checks(&checks);
    dir.write_summary("run", status, &checks, &[("steps".into(), "50".into())])
        .unwrap();

    let p = dir.path();
    assert_eq!(header(&p.join("norms.csv")), "t,norm_name,value");
    assert_eq!(header(&p.join("mu.csv")), "t,mu,mu_dot,radius,t_star_flag");
    assert_eq!(
        header(&p.join("apriori.csv")),
        "t,lhs,rhs,ratio,theta_smallness,trivial"
    );
    assert_eq!(
        header(&p.join("radius.csv")),
        "t,predicted,measured_u,measured_theta,measured"
    );
    assert_eq!(
        header(&p.join("spectrum.csv")),
        "t,mode,abs_xi,amp_u,amp_theta"
    );
    assert_eq!(header(&p.join("checks.csv")), "name,value,limit,pass");
    assert_eq!(RunConfig::load(&p.join("config.toml")).unwrap(), cfg);

    let summary = fs::read_to_string(p.join("summary.kv")).unwrap();
    assert_eq!(
        summary,
        "experiment=run\nstatus=FAIL\nexit_code=2\nchecks=2\n\
         check.ratio=PASS\nvalue.ratio=1.5\nlimit.ratio=2\n\
         check.floor=FAIL\nvalue.floor=0.2\nlimit.floor=0.5\n\
         steps=50\n"
    );

    // snapshot_every = 25 over 50 steps: t = 0, 0.025, 0.05
    assert_eq!(rec.snapshots.len(), 3);
    let bytes = fs::read(p.join("snapshots/theta_00002.bin")).unwrap();
    let back = snapshot::decode(&bytes).unwrap();
    assert_eq!(back.values(), rec.snapshots[2].1.values());

    let plots = emit_plots(p).unwrap();
    let names: Vec<String> = plots
        .written
        .iter()
        .map(|w| w.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "norms.plot",
            "mu.plot",
            "apriori.plot",
            "radius.plot",
            "spectrum.plot"
        ]
    );
    assert_eq!(plots.missing, ["uniqueness.csv", "nu_differences.csv"]);
    assert_eq!(
        fs::read_to_string(p.join("apriori.plot")).unwrap(),
        "title=a priori lhs/rhs ratio vs t\ndata=apriori.csv\nx=t\ny=ratio\nxscale=linear\nyscale=linear\n"
    );
}

#[test]
fn plots_of_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emit_plots(tmp.path()).unwrap();
    assert!(out.written.is_empty());
    assert_eq!(out.missing.len(), 7);
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn status_codes() {
    assert_eq!(Status::from_checks(&[]), Status::Pass);
    assert_eq!(Status::Pass.exit_code(), 0);
    assert_eq!(Status::Fail.exit_code(), 2);
    assert_eq!(Status::Aborted.exit_code(), 3);
    assert_eq!(Status::Aborted.as_str(), "ABORTED");
}
