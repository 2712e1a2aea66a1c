//! Pipeline implementations behind the CLI subcommands. Each writes its
//! CSV artifacts plus a manifest (config echo, seed, code version) into
//! the output directory; data goes only to files, progress to stderr.

use crate::config::ExperimentConfig;
use corrsim::fitkit;
use corrsim::gateset::{schedule_table, Family, Segment};
use corrsim::noise::{BlockLen, NoiseSpec, NoiseTrace};
use corrsim::qcore::{clifford_table, clifford_table_csv};
use corrsim::simulator::{run_circuit, run_experiment_on, CircuitSpec, RunSpec, SurvivalRecord};
use corrsim::stats::{self, Correlation, RecordGrid};
use corrsim::walkmodel::{self, Bandwidth};
use std::error::Error;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

fn block_tag(m: &BlockLen) -> String {
    match m {
        BlockLen::Full => "full".to_string(),
        BlockLen::Gates(g) => g.to_string(),
    }
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_manifest(config: &ExperimentConfig, out: &Path, command: &str) -> Result<()> {
    let text = format!(
        "command={command}\nversion={}\n{}",
        env!("CARGO_PKG_VERSION"),
        config.manifest_text()
    );
    fs::write(out.join(format!("manifest_{command}.txt")), text)?;
    Ok(())
}

fn records_path(out: &Path, config: &ExperimentConfig, m: &BlockLen) -> PathBuf {
    if config.m_n_sweep.is_empty() {
        out.join("records.csv")
    } else {
        out.join(format!("records_mn{}.csv", block_tag(m)))
    }
}

fn circuits(config: &ExperimentConfig) -> Vec<CircuitSpec> {
    let table = clifford_table();
    (0..config.k)
        .map(|i| CircuitSpec::random(i as u64, config.j, config.seed, &table))
        .collect()
}

pub fn gen_circuits(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "gen-circuits")?;
    let mut csv = String::from("circuit_id,position,clifford_index\n");
    for c in circuits(config) {
        for (pos, g) in c.gates.iter().enumerate() {
            writeln!(csv, "{},{},{}", c.id, pos, g)?;
        }
    }
    fs::write(out.join("circuits.csv"), csv)?;
    eprintln!("wrote circuits.csv ({} circuits of {} gates)", config.k, config.j);
    Ok(())
}

fn run_spec(config: &ExperimentConfig, m: BlockLen) -> RunSpec {
    RunSpec {
        j: config.j,
        circuits: config.k,
        realizations: config.n,
        repetitions: config.r,
        family: config.family,
        noise: NoiseSpec {
            sigma_l2: config.sigma_l2,
            sigma_s2: config.sigma_s2,
            m_n: m,
            master_seed: config.seed,
        },
    }
}

fn records_csv(records: &[SurvivalRecord]) -> String {
    let mut csv = String::from("circuit_id,realization_id,family,p_true,p_est\n");
    for r in records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.circuit_id,
            r.realization_id,
            r.family.as_str(),
            r.p_true,
            r.p_est
        );
    }
    csv
}

fn read_records(path: &Path) -> Result<Vec<SurvivalRecord>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {} (run `simulate` first?): {e}", path.display()))?;
    let mut records = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(format!("malformed record line: {line}").into());
        }
        records.push(SurvivalRecord {
            circuit_id: cols[0].parse()?,
            realization_id: cols[1].parse()?,
            family: cols[2].parse::<Family>()?,
            p_true: cols[3].parse()?,
            p_est: cols[4].parse()?,
            seed: 0,
        });
    }
    Ok(records)
}

pub fn simulate(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "simulate")?;
    gen_circuits(config, out)?;
    let circuits = circuits(config);
    let schedules = schedule_table(config.family);
    for m in config.block_lengths() {
        let spec = run_spec(config, m);
        let records = run_experiment_on(&circuits, &schedules, &spec);
        let path = records_path(out, config, &m);
        fs::write(&path, records_csv(&records))?;
        eprintln!(
            "wrote {} ({} records, family {})",
            path.display(),
            records.len(),
            config.family.as_str()
        );
    }
    Ok(())
}

pub fn variance(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "variance")?;
    let mut csv = String::from("family,m_n,reordering_id,n,variance\n");
    let mut gammafit = String::from("family,correlation,alpha,beta,ks_stat\n");
    let mut density = String::from("family,correlation,x,density,count_overlay\n");
    let mut have_gamma = false;
    for m in config.block_lengths() {
        let records = read_records(&records_path(out, config, &m))?;
        let grid = RecordGrid::from_records(&records, true)?;
        let (trajectories, mean) =
            stats::cumulative_variance_trajectories(&grid, config.reorderings, config.seed)?;
        let tag = block_tag(&m);
        for t in &trajectories {
            for (i, v) in t.points.iter().enumerate() {
                writeln!(csv, "{},{},{},{},{}", config.family.as_str(), tag, t.reordering_id, i + 1, v)?;
            }
        }
        for (i, v) in mean.iter().enumerate() {
            writeln!(csv, "{},{},-1,{},{}", config.family.as_str(), tag, i + 1, v)?;
        }

        // analytic Gamma overlay for single-component noise
        let single = (config.sigma_l2 > 0.0) != (config.sigma_s2 > 0.0);
        if single {
            let correlated = config.sigma_l2 > 0.0 && matches!(m, BlockLen::Full);
            let (corr, sigma2) = if correlated {
                (Correlation::Correlated, config.sigma_l2)
            } else {
                (Correlation::Uncorrelated, config.sigma_l2.max(config.sigma_s2))
            };
            if let Ok(params) = stats::gamma_params(corr, config.j, sigma2, config.n, config.bandwidth)
            {
                let means: Vec<f64> = (0..grid.circuits)
                    .map(|c| {
                        (0..grid.realizations)
                            .map(|r| grid.values[c * grid.realizations + r])
                            .sum::<f64>()
                            / grid.realizations as f64
                    })
                    .collect();
                let ks = stats::ks_statistic(&means, |x| params.cdf(x));
                let label = if corr == Correlation::Correlated { "correlated" } else { "uncorrelated" };
                writeln!(
                    gammafit,
                    "{},{},{},{},{}",
                    config.family.as_str(),
                    label,
                    params.alpha,
                    params.beta,
                    ks
                )?;
                // density samples for histogram overlays; count_overlay is
                // the density renormalized by bin_width x k for a 20-bin
                // count histogram of the circuit means
                let x_max = means.iter().cloned().fold(0.0, f64::max).max(params.mean() * 4.0);
                let bin_width = x_max / 20.0;
                for i in 1..=200 {
                    let x = x_max * i as f64 / 200.0;
                    let h = 1e-6 * x_max;
                    let pdf = (params.cdf(x + h) - params.cdf(x - h)) / (2.0 * h);
                    writeln!(
                        density,
                        "{},{},{},{},{}",
                        config.family.as_str(),
                        label,
                        x,
                        pdf,
                        pdf * bin_width * grid.circuits as f64
                    )?;
                }
                have_gamma = true;
            }
        }
        eprintln!("variance trajectories done for m_n={tag}");
    }
    fs::write(out.join("variance.csv"), csv)?;
    if have_gamma {
        fs::write(out.join("gammafit.csv"), gammafit)?;
        fs::write(out.join("gamma_density.csv"), density)?;
    }
    Ok(())
}

/// Mean trajectories per (family, m_n) from variance.csv.
fn read_mean_trajectories(out: &Path) -> Result<Vec<(String, String, Vec<f64>)>> {
    let path = out.join("variance.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {} (run `variance` first?): {e}", path.display()))?;
    let mut out_rows: Vec<(String, String, Vec<f64>)> = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 || cols[2] != "-1" {
            continue;
        }
        let key = (cols[0].to_string(), cols[1].to_string());
        let n: usize = cols[3].parse()?;
        let v: f64 = cols[4].parse()?;
        match out_rows.iter_mut().find(|(f, m, _)| *f == key.0 && *m == key.1) {
            Some((_, _, traj)) => {
                if traj.len() + 1 != n {
                    return Err("mean trajectory rows out of order".into());
                }
                traj.push(v);
            }
            None => out_rows.push((key.0, key.1, vec![v])),
        }
    }
    if out_rows.is_empty() {
        return Err("variance.csv contains no mean trajectory rows".into());
    }
    Ok(out_rows)
}

pub fn fit(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "fit")?;
    let mut csv = String::from("family,m_n,sigma_s2,sigma_l2,rss,aic,bic\n");
    for (family, tag, traj) in read_mean_trajectories(out)? {
        let fam: Family = family.parse()?;
        let fit = fitkit::fit_error_strengths(&traj, config.j, fam)?;
        let (aic, bic) = if fit.rss > 0.0 {
            (
                fitkit::aic(fit.rss, fit.n_pts, fit.kappa)?,
                fitkit::bic(fit.rss, fit.n_pts, fit.kappa)?,
            )
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        writeln!(csv, "{},{},{},{},{},{},{}", family, tag, fit.sigma_s2, fit.sigma_l2, fit.rss, aic, bic)?;
        eprintln!(
            "fit family={family} m_n={tag}: sigma_s2={:.4e} sigma_l2={:.4e}",
            fit.sigma_s2, fit.sigma_l2
        );
    }
    fs::write(out.join("fit.csv"), csv)?;
    Ok(())
}

pub fn scan(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "scan")?;
    let trajectories = read_mean_trajectories(out)?;
    let (family, tag, traj) = trajectories
        .first()
        .ok_or("no mean trajectory available")?;
    let fam: Family = family.parse()?;
    let fit = fitkit::fit_error_strengths(traj, config.j, fam)?;
    let grid = fitkit::default_scan_grid(fit.sigma_l2);
    let scan = fitkit::likelihood_scan(traj, config.j, fam, &grid)?;
    let mut csv = String::from("sigma_l2_fixed,sigma_s2_refit,rel_likelihood,delta_bic\n");
    for p in &scan.points {
        writeln!(csv, "{},{},{},{}", p.sigma_l2_fixed, p.sigma_s2_refit, p.rel_likelihood, p.delta_bic)?;
    }
    fs::write(out.join("scan.csv"), csv)?;
    eprintln!(
        "scan family={family} m_n={tag}: 5% likelihood interval [{:.3e}, {:.3e}], \
         dBIC=10 interval [{:.3e}, {:.3e}]",
        scan.likelihood_interval.0,
        scan.likelihood_interval.1,
        scan.bic_interval.0,
        scan.bic_interval.1
    );
    Ok(())
}

pub fn walk_check(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "walk-check")?;
    let table = clifford_table();
    let schedules = schedule_table(Family::Primitive);
    let delta = config.delta_static;
    let mut csv = String::from("circuit_id,p_walk,p_true,abs_diff\n");
    let mut worst = 0.0f64;
    for c in circuits(config) {
        let boundaries = c.gate_boundaries(&schedules);
        let trace = NoiseTrace {
            breakpoints: vec![0.0, *boundaries.last().unwrap()],
            values: vec![delta],
        };
        let p_true = run_circuit(&c, &schedules, &trace)?;
        let (_, p_walk) = walkmodel::walk(&c, &vec![delta; config.j], &table)?;
        let diff = (p_true - p_walk).abs();
        worst = worst.max(diff);
        writeln!(csv, "{},{},{},{}", c.id, p_walk, p_true, diff)?;
    }
    fs::write(out.join("walkcheck.csv"), csv)?;
    eprintln!("walk-check: worst |p_walk - p_true| = {worst:.3e} at delta = {delta}");
    Ok(())
}

pub fn acf(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "acf")?;
    let schedules = schedule_table(config.family);
    let mut csv = String::from("lag,acf,m_n\n");
    for m in config.block_lengths() {
        let tag = block_tag(&m);
        let mut mean_acf = vec![0.0; config.max_lag + 1];
        let mut count = 0usize;
        for c in circuits(config) {
            let boundaries = c.gate_boundaries(&schedules);
            for r in 0..config.n {
                let spec = NoiseSpec {
                    sigma_l2: config.sigma_l2,
                    sigma_s2: config.sigma_s2,
                    m_n: m,
                    master_seed: config.seed,
                };
                let trace = corrsim::noise::sample_trace(&spec, &boundaries, c.id, r as u64);
                let series: Vec<f64> = walkmodel::error_vector_series(&c, &schedules, &trace)?
                    .iter()
                    .map(|v| v.a.norm())
                    .collect();
                let a = walkmodel::acf(&series, config.max_lag)?;
                for (acc, v) in mean_acf.iter_mut().zip(a) {
                    *acc += v;
                }
                count += 1;
            }
        }
        for v in mean_acf.iter_mut() {
            *v /= count as f64;
        }
        for (lag, v) in mean_acf.iter().enumerate() {
            writeln!(csv, "{},{},{}", lag, v, tag)?;
        }
        match walkmodel::correlation_length(&mean_acf) {
            Ok(me) => eprintln!("m_n={tag}: M_epsilon = {me:.2}"),
            Err(_) => eprintln!("m_n={tag}: ACF never crosses 1/e within max_lag"),
        }
    }
    fs::write(out.join("acf.csv"), csv)?;
    Ok(())
}

pub fn ff(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "ff")?;
    let omegas: Vec<f64> = (0..config.omega_points)
        .map(|i| {
            let t = i as f64 / (config.omega_points - 1) as f64;
            config.omega_min * (config.omega_max / config.omega_min).powf(t)
        })
        .collect();
    let x_pi = 4usize; // X180 element index
    let mut columns = Vec::new();
    for family in [Family::Primitive, Family::Corpse, Family::Wamf] {
        let schedule = &schedule_table(family)[x_pi];
        columns.push(walkmodel::filter_function(schedule, &omegas));
    }
    let mut csv = String::from("omega,G2_primitive,G2_corpse,G2_wamf\n");
    for (i, &w) in omegas.iter().enumerate() {
        writeln!(csv, "{},{},{},{}", w, columns[0][i], columns[1][i], columns[2][i])?;
    }
    fs::write(out.join("ff.csv"), csv)?;
    eprintln!("wrote ff.csv over {} frequencies", omegas.len());
    Ok(())
}

pub fn predict(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "predict")?;
    let mut curve = String::from("n,variance\n");
    for n in 1..=config.n {
        let v = stats::variance_model(n, config.j, config.sigma_s2, config.sigma_l2, config.family)?;
        writeln!(curve, "{},{}", n, v)?;
    }
    fs::write(out.join("predict.csv"), curve)?;

    let mut gamma = String::from("family,correlation,alpha,beta,mean\n");
    if config.sigma_l2 > 0.0 && config.sigma_s2 == 0.0 {
        let p = stats::gamma_params(
            Correlation::Correlated,
            config.j,
            config.sigma_l2,
            config.n,
            Bandwidth::Single,
        )?;
        writeln!(gamma, "{},correlated,{},{},{}", config.family.as_str(), p.alpha, p.beta, p.mean())?;
    }
    if config.sigma_s2 > 0.0 && config.sigma_l2 == 0.0 {
        let p = stats::gamma_params(
            Correlation::Uncorrelated,
            config.j,
            config.sigma_s2,
            config.n,
            config.bandwidth,
        )?;
        writeln!(gamma, "{},uncorrelated,{},{},{}", config.family.as_str(), p.alpha, p.beta, p.mean())?;
    }
    fs::write(out.join("predict_gamma.csv"), gamma)?;
    eprintln!("wrote predict.csv and predict_gamma.csv");
    Ok(())
}

pub fn dump_trace(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "dump-trace")?;
    let table = clifford_table();
    let schedules = schedule_table(config.family);
    let circuit = CircuitSpec::random(0, config.j, config.seed, &table);
    let boundaries = circuit.gate_boundaries(&schedules);
    let spec = NoiseSpec {
        sigma_l2: config.sigma_l2,
        sigma_s2: config.sigma_s2,
        m_n: config.m_n,
        master_seed: config.seed,
    };
    let trace = corrsim::noise::sample_trace(&spec, &boundaries, 0, 0);
    let mut csv = String::from("t_start,t_end,delta\n");
    for (i, &delta) in trace.values.iter().enumerate() {
        writeln!(csv, "{},{},{}", trace.breakpoints[i], trace.breakpoints[i + 1], delta)?;
    }
    fs::write(out.join("trace.csv"), csv)?;
    eprintln!("wrote trace.csv ({} intervals)", trace.values.len());
    Ok(())
}

pub fn dump_gates(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_manifest(config, out, "dump-gates")?;
    fs::write(out.join("clifford_table.csv"), clifford_table_csv())?;
    let mut csv = String::from("family,clifford_index,segment_index,theta,amp_ratio,phase,duration\n");
    for family in [Family::Primitive, Family::Corpse, Family::Wamf] {
        for s in schedule_table(family) {
            for (i, seg) in s.segments.iter().enumerate() {
                let (theta, amp, phase) = match *seg {
                    Segment::Drive { theta, amp, phase } => (theta, amp, phase),
                    Segment::Wait { .. } => (0.0, 0.0, 0.0),
                    Segment::FrameShift { angle } => (angle, 0.0, 0.0),
                };
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    family.as_str(),
                    s.clifford_index,
                    i,
                    theta,
                    amp,
                    phase,
                    seg.duration()
                )?;
            }
        }
    }
    fs::write(out.join("schedules.csv"), csv)?;
    eprintln!("wrote clifford_table.csv and schedules.csv");
    Ok(())
}
