//! Subcommand drivers: run experiments, write CSV/JSON/SVG, finish with the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use prandtl_lab::config::RunConfig;
use prandtl_lab::eigen::Eigenpair;
use prandtl_lab::evolve::{ProbeRow, Trajectory};
use prandtl_lab::experiments::*;
use prandtl_lab::export::{csv, ArtifactSink, LinePlot};
use prandtl_lab::Result;

use crate::Command;

const MAX_PLOT_POINTS: usize = 400;

fn thin(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let step = points.len().div_ceil(MAX_PLOT_POINTS).max(1);
    let last = points.last().copied();
    let mut out: Vec<(f64, f64)> = points.into_iter().step_by(step).collect();
    if let (Some(l), Some(o)) = (last, out.last()) {
        if *o != l {
            out.push(l);
        }
    }
    out
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<Check>> {
    let mut sink = ArtifactSink::new(out)?;
    let mut checks = Vec::new();
    let (pair, eigen) = run_eigen(&cfg.eigen)?;
    if matches!(cmd, Command::Eigen | Command::All) {
        write_eigen(&mut sink, &pair, &eigen)?;
        checks.extend(eigen.checks.clone());
    }
    if cmd != Command::Eigen {
        let pipes = pipelines(cfg, &pair)?;
        let mut constants: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();
        if matches!(cmd, Command::Heat | Command::All) {
            for p in &pipes {
                checks.extend(write_heat(&mut sink, p)?);
            }
        }
        if matches!(cmd, Command::Mode | Command::All) {
            for p in &pipes {
                let (c, c0) = write_mode(&mut sink, cfg, p, &pair)?;
                checks.extend(c);
                constants.entry(p.family().to_string()).or_default().0 = Some(c0);
            }
        }
        if matches!(cmd, Command::ResidualScan | Command::All) {
            for p in &pipes {
                let (c, c1) = write_residual(&mut sink, p, cfg, &pair)?;
                checks.extend(c);
                constants.entry(p.family().to_string()).or_default().1 = Some(c1);
            }
            let obs = run_obstruction(cfg, &pair)?;
            sink.json("obstruction.json", &obs)?;
            checks.extend(obs.checks);
            if cmd == Command::All {
                let inv = run_inviscid(&pipes[0].profile, pipes[0].family())?;
                sink.json("inviscid.json", &inv)?;
                checks.extend(inv.checks);
            }
        }
        if matches!(cmd, Command::GrowthScan | Command::IllposednessProbe | Command::All) {
            let (mut growth, trajs) = run_growth_scan(cfg, &pipes, &pair, cmd != Command::IllposednessProbe)?;
            for f in &mut growth.families {
                if let Some((c0, c1)) = constants.get(&f.family) {
                    f.report.c0 = *c0;
                    f.report.c1 = *c1;
                }
            }
            if cmd != Command::IllposednessProbe {
                write_growth(&mut sink, &growth, &trajs)?;
                checks.extend(growth.checks.clone());
            }
            if cmd != Command::GrowthScan {
                let probe = run_probe(cfg, &pipes, &pair, &growth)?;
                write_probe(&mut sink, &probe)?;
                checks.extend(probe.checks);
            }
        }
    }
    sink.json("checks.json", &checks)?;
    sink.finish(cmd.name(), cfg, tolerances(cfg))?;
    Ok(checks)
}

fn write_eigen(sink: &mut ArtifactSink, pair: &Eigenpair, report: &EigenReport) -> Result<()> {
    sink.json("eigen/eigenpair.json", &EigenExport::new(pair))?;
    sink.json("eigen/report.json", report)?;
    sink.text("eigen/profile.csv", &eigen_csv(pair))?;
    let v = pair.v_samples();
    let re = pair.z.iter().zip(&v).map(|(z, c)| (*z, c.re)).collect();
    let im = pair.z.iter().zip(&v).map(|(z, c)| (*z, c.im)).collect();
    let svg = LinePlot::new("shear-layer profile V(z)", "z", "V")
        .series("Re V", thin(re))
        .series("Im V", thin(im))
        .to_svg();
    sink.text("eigen/profile.svg", &svg)
}

fn write_heat(sink: &mut ArtifactSink, p: &Pipeline) -> Result<Vec<Check>> {
    let f = p.family();
    let report = run_heat(p)?;
    sink.json(&format!("heat/{f}.json"), &report)?;
    sink.text(&format!("heat/{f}_field.csv"), &p.field.to_csv())?;
    sink.text(
        &format!("heat/{f}_path.csv"),
        &csv(
            &["t", "a", "a_dot", "lambda", "growth"],
            report.path.iter().map(|r| vec![r.t, r.a, r.a_dot, r.lambda, r.growth]),
        ),
    )?;
    let lam0 = report.lambda0;
    let svg = LinePlot::new(&format!("critical path ({f})"), "t", "")
        .series("a(t)", report.path.iter().map(|r| (r.t, r.a)).collect())
        .series("lambda(t)/lambda(0)", report.path.iter().map(|r| (r.t, r.lambda / lam0)).collect())
        .to_svg();
    sink.text(&format!("heat/{f}_path.svg"), &svg)?;
    Ok(report.checks)
}

fn write_mode(sink: &mut ArtifactSink, cfg: &RunConfig, p: &Pipeline, pair: &Eigenpair) -> Result<(Vec<Check>, f64)> {
    let f = p.family();
    let (report, fields) = run_mode(cfg, p, pair)?;
    sink.json(&format!("mode/{f}.json"), &report)?;
    for (n, body) in &fields {
        sink.text(&format!("mode/{f}_n{n}.csv"), body)?;
    }
    sink.text(
        &format!("mode/{f}_sweep.csv"),
        &csv(
            &["n", "t", "norm_w2", "jump", "divergence", "split_defect"],
            report.rows.iter().map(|r| vec![r.n as f64, r.t, r.norm_w2, r.jump, r.divergence, r.split_defect]),
        ),
    )?;
    let mut plot = LinePlot::new(&format!("log ||U|| in W^(2,inf) ({f})"), "t", "log norm");
    for &n in &cfg.mode.n {
        let pts = report.rows.iter().filter(|r| r.n == n).map(|r| (r.t, r.norm_w2.ln())).collect();
        plot = plot.series(&format!("n = {n}"), pts);
    }
    sink.text(&format!("mode/{f}_norms.svg"), &plot.to_svg())?;
    Ok((report.checks, report.c0))
}

fn write_residual(sink: &mut ArtifactSink, p: &Pipeline, cfg: &RunConfig, pair: &Eigenpair) -> Result<(Vec<Check>, f64)> {
    let f = p.family();
    let scan = run_residual_scan(cfg, p, pair)?;
    sink.json(&format!("residual/{f}.json"), &scan)?;
    sink.text(
        &format!("residual/{f}.csv"),
        &csv(&["n", "alpha", "sup", "t_at_sup"], scan.rows.iter().map(|r| vec![r.n as f64, r.alpha, r.sup, r.t_at_sup])),
    )?;
    let mut plot = LinePlot::new(&format!("residual plateau ({f})"), "n = 1/eps", "sup / mean");
    plot.log_x = true;
    for pl in &scan.plateau {
        let pts = scan.rows.iter().filter(|r| r.alpha == pl.alpha).map(|r| (r.n as f64, r.sup / pl.mean)).collect();
        plot = plot.series(&format!("alpha = {}", pl.alpha), pts);
    }
    sink.text(&format!("residual/{f}.svg"), &plot.to_svg())?;
    Ok((scan.checks, scan.c1))
}

fn write_growth(sink: &mut ArtifactSink, growth: &GrowthScan, trajs: &[Vec<Trajectory>]) -> Result<()> {
    sink.json("growth/report.json", growth)?;
    let mut rates = LinePlot::new("sigma(k)/sqrt(k)", "k", "rate / sqrt(k)");
    rates.log_x = true;
    for (fam, runs) in growth.families.iter().zip(trajs) {
        let f = &fam.family;
        let mut plot = LinePlot::new(&format!("log sup|u| ({f})"), "t", "log norm");
        for tr in runs {
            sink.text(
                &format!("growth/{f}_k{}.csv", tr.k),
                &csv(&["t", "log_norm"], tr.t.iter().zip(&tr.log_norm).map(|(t, l)| vec![*t, *l])),
            )?;
            let pts = tr.t.iter().copied().zip(tr.log_norm.iter().copied()).collect();
            plot = plot.series(&format!("k = {}", tr.k), thin(pts));
        }
        sink.text(&format!("growth/{f}.svg"), &plot.to_svg())?;
        let ks: Vec<f64> = fam.entries.iter().map(|e| e.k).collect();
        rates = rates
            .series(&format!("measured {f}"), fam.entries.iter().map(|e| (e.k, e.rate_over_sqrt_k)).collect())
            .series(
                &format!("frozen spectrum {f}"),
                fam.entries.iter().filter_map(|e| e.spectral_rate.map(|s| (e.k, s / e.k.sqrt()))).collect(),
            )
            .series(&format!("|Im tau_phys(0)| {f}"), ks.iter().map(|&k| (k, fam.rate0)).collect());
    }
    sink.text("growth/rates.svg", &rates.to_svg())
}

fn probe_csv(rows: &[ProbeRow]) -> String {
    csv(
        &["k", "t", "m", "alpha", "mu", "sigma", "log_rho"],
        rows.iter().map(|r| vec![r.k, r.t, r.m, r.alpha, r.mu, r.sigma, r.log_rho]),
    )
}

fn write_probe(sink: &mut ArtifactSink, probe: &ProbeReport) -> Result<()> {
    sink.json("probe/report.json", probe)?;
    for fam in &probe.families {
        let f = &fam.family;
        let all: Vec<ProbeRow> = fam.raw.iter().chain(&fam.below).chain(&fam.above).chain(&fam.snapshots).copied().collect();
        sink.text(&format!("probe/{f}.csv"), &probe_csv(&all))?;
        let pts = |rows: &[ProbeRow]| rows.iter().map(|r| (r.k, r.log_rho)).collect::<Vec<_>>();
        let mut plot = LinePlot::new(&format!("log rho(k, t) ({f})"), "k", "log rho");
        plot.log_x = true;
        plot = plot.series("raw amplification", pts(&fam.raw));
        if !fam.below.is_empty() {
            plot = plot.series("sigma below rate", pts(&fam.below)).series("sigma above rate", pts(&fam.above));
        }
        sink.text(&format!("probe/{f}.svg"), &plot.to_svg())?;
    }
    Ok(())
}
