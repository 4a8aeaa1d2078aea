use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use indclust::clustering::{
    clin, clink_call_bound, clink_series, three_sample_with, ClusteringResult, ExactOracle,
    PlugInOracle, StrictComparator,
};
use indclust::datagen::ProcessSpec;
use indclust::estimators::{compression_sum_rate, compressor_by_name, SumInfoEstimator};
use indclust::finite_dist::{
    brute_force_finest, parity_distribution, FiniteJoint, BRUTE_FORCE_MAX_VARS,
};
use indclust::io::{read_series_csv, write_series_csv};
use indclust::quantizer::fit_normalizer;
use indclust::{Error, Partition, Result, RunConfig, SeriesSet};
use serde::Serialize;

use crate::report::{
    named, one_based, BenchRow, ClusterReport, ConfigEcho, GroundTruthReport, OracleDemoReport,
    ThreeSampleReport, SCHEMA_VERSION,
};
use crate::{Mode, RunArgs};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn read_csv(path: &Path) -> Result<SeriesSet> {
    read_series_csv(fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    emit(output, &text)
}

fn load_spec(path: &Path, run: &RunArgs, n: Option<usize>) -> Result<ProcessSpec> {
    let mut spec = ProcessSpec::from_json(&read_text(path)?)?;
    if let Some(seed) = run.seed() {
        spec.seed = seed;
    }
    if let Some(n) = n {
        spec.n = n;
    }
    Ok(spec)
}

pub fn generate(
    input: &Path,
    output: &Path,
    truth: Option<&Path>,
    n: Option<usize>,
    run: &RunArgs,
) -> Result<()> {
    let spec = load_spec(input, run, n)?;
    let generated = spec.generate()?;
    let file = fs::File::create(output)?;
    write_series_csv(&generated.series, std::io::BufWriter::new(file))?;
    let truth_path = truth.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = output.as_os_str().to_owned();
        p.push(".truth.json");
        PathBuf::from(p)
    });
    let report = GroundTruthReport {
        schema_version: SCHEMA_VERSION,
        series: generated.series.count(),
        length: generated.series.len(),
        partition: one_based(&generated.ground_truth),
        clusters: named(&generated.ground_truth, &generated.series),
        seed: spec.seed,
        spec: serde_json::to_value(&spec).expect("spec serializes"),
    };
    emit_json(Some(&truth_path), &report)
}

fn stationary_k(k: Option<usize>) -> Result<usize> {
    match k {
        Some(k) if k >= 2 => Ok(k),
        Some(k) => Err(Error::Validation(format!(
            "stationary mode needs --k >= 2, got {k}"
        ))),
        None => Err(Error::Validation("stationary mode needs --k".into())),
    }
}

fn cluster_sample(
    mode: Mode,
    k: Option<usize>,
    s: &SeriesSet,
    cfg: &RunConfig,
) -> Result<(ClusteringResult, u64)> {
    match mode {
        Mode::Iid => {
            let oracle = PlugInOracle::new(s, cfg)?;
            let mut res = clin(&oracle)?;
            res.estimator_calls = oracle.estimator().calls();
            let n = s.count() as u64;
            let bound = 2 * res.partition.k() as u64 * n * n;
            Ok((res, bound))
        }
        Mode::Stationary => {
            let k = stationary_k(k)?;
            let res = clink_series(s, k, cfg, &StrictComparator)?;
            Ok((res, clink_call_bound(s.count(), k)))
        }
        Mode::Oracle => Err(Error::Validation(
            "oracle mode reads a finite joint table, not a sample".into(),
        )),
    }
}

pub fn cluster(
    mode: Mode,
    k: Option<usize>,
    input: &Path,
    output: Option<&Path>,
    compressor: Option<&str>,
    run: &RunArgs,
) -> Result<()> {
    let cfg = run.config()?;
    let echo = ConfigEcho::new(&cfg, Some(mode.name()), k, compressor);
    let report = if mode == Mode::Oracle {
        if compressor.is_some() {
            return Err(Error::Validation(
                "a compressor needs sample input (iid or stationary mode)".into(),
            ));
        }
        let joint = FiniteJoint::from_text(&read_text(input)?)?;
        let oracle = ExactOracle::new(&joint)?;
        let res = clin(&oracle)?;
        let n = joint.vars() as u64;
        let names: Vec<String> = (1..=joint.vars()).map(|i| format!("x{i}")).collect();
        ClusterReport {
            schema_version: SCHEMA_VERSION,
            command: "cluster".into(),
            mode: mode.name().into(),
            series: joint.vars(),
            length: None,
            k: res.partition.k(),
            partition: one_based(&res.partition),
            clusters: res
                .partition
                .blocks()
                .into_iter()
                .map(|b| b.into_iter().map(|i| names[i].clone()).collect())
                .collect(),
            score: None,
            compression_bits: None,
            oracle_calls: res.oracle_calls,
            estimator_calls: 0,
            call_bound: 2 * res.partition.k() as u64 * n * n,
            candidates_examined: res.candidates_examined,
            seed: cfg.seed,
            config: echo,
        }
    } else {
        let s = read_csv(input)?;
        let backend = compressor.map(compressor_by_name).transpose()?;
        let (res, bound) = cluster_sample(mode, k, &s, &cfg)?;
        let compression_bits = match backend {
            Some(c) => Some(compression_sum_rate(
                &s,
                &res.partition.blocks(),
                c.as_ref(),
                cfg.l_max.min(8),
                &fit_normalizer(&s),
            )?),
            None => None,
        };
        ClusterReport {
            schema_version: SCHEMA_VERSION,
            command: "cluster".into(),
            mode: mode.name().into(),
            series: s.count(),
            length: Some(s.len()),
            k: res.partition.k(),
            partition: one_based(&res.partition),
            clusters: named(&res.partition, &s),
            score: res.score,
            compression_bits,
            oracle_calls: res.oracle_calls,
            estimator_calls: res.estimator_calls,
            call_bound: bound,
            candidates_examined: res.candidates_examined,
            seed: cfg.seed,
            config: echo,
        }
    };
    emit_json(output, &report)
}

pub fn three_sample(input: &Path, output: Option<&Path>, run: &RunArgs) -> Result<()> {
    let cfg = run.config()?;
    let s = read_csv(input)?;
    if s.count() != 3 {
        return Err(Error::Validation(format!(
            "three-sample needs exactly 3 series, the input has {}",
            s.count()
        )));
    }
    let est = SumInfoEstimator::new(&s, &fit_normalizer(&s), &cfg)?;
    let out = three_sample_with(&est, est.threshold())?;
    emit_json(
        output,
        &ThreeSampleReport {
            schema_version: SCHEMA_VERSION,
            command: "three-sample".into(),
            label: out.label,
            left: out.left,
            right: out.right,
            margin: out.margin,
            low_margin: out.low_margin,
            threshold: est.threshold(),
            config: ConfigEcho::new(&cfg, None, None, None),
        },
    )
}

pub fn oracle_demo(
    input: Option<&Path>,
    parity: Option<&[usize]>,
    output: Option<&Path>,
) -> Result<()> {
    let joint = match (input, parity) {
        (Some(path), None) => FiniteJoint::from_text(&read_text(path)?)?,
        (None, Some(sizes)) => parity_distribution(sizes)?,
        _ => {
            return Err(Error::Validation(
                "give exactly one of --input and --parity".into(),
            ))
        }
    };
    let oracle = ExactOracle::new(&joint)?;
    let res = clin(&oracle)?;
    let brute = if joint.vars() <= BRUTE_FORCE_MAX_VARS {
        Some(brute_force_finest(&joint)?)
    } else {
        None
    };
    let n = joint.vars() as u64;
    let report = OracleDemoReport {
        schema_version: SCHEMA_VERSION,
        command: "oracle-demo".into(),
        variables: joint.vars(),
        clin_partition: one_based(&res.partition),
        brute_force_partition: brute.as_ref().map(one_based),
        agreement: brute.as_ref().map(|b| b.canonical() == res.partition.canonical()),
        oracle_calls: res.oracle_calls,
        call_bound: 2 * res.partition.k() as u64 * n * n,
        multi_information: oracle.multi(&res.partition.blocks())?,
    };
    emit_json(output, &report)
}

fn recovered(found: &Partition, truth: &Partition) -> bool {
    found.canonical() == truth.canonical()
}

pub fn bench(
    mode: Mode,
    k: Option<usize>,
    input: &Path,
    ns: &[usize],
    seeds: usize,
    output: Option<&Path>,
    run: &RunArgs,
) -> Result<()> {
    if mode == Mode::Oracle {
        return Err(Error::Validation("bench runs on samples (iid or stationary)".into()));
    }
    if mode == Mode::Stationary {
        stationary_k(k)?;
    }
    if seeds == 0 || ns.is_empty() {
        return Err(Error::Validation("bench needs at least one n and one seed".into()));
    }
    let cfg = run.config()?;
    let base = load_spec(input, run, None)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut hits = 0;
        for offset in 0..seeds as u64 {
            let mut spec = base.clone();
            spec.n = n;
            spec.seed = base.seed.wrapping_add(offset);
            let generated = spec.generate()?;
            let run_cfg = RunConfig {
                seed: spec.seed,
                ..cfg.clone()
            };
            match cluster_sample(mode, k, &generated.series, &run_cfg) {
                Ok((res, _)) => hits += recovered(&res.partition, &generated.ground_truth) as usize,
                // a livelocked split counts as a failed recovery
                Err(Error::InconsistentOracle { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        rows.push(BenchRow {
            n,
            runs: seeds,
            recovered: hits,
            fraction: hits as f64 / seeds as f64,
        });
    }
    let mut text = String::from("n,runs,recovered,fraction\n");
    for r in &rows {
        text.push_str(&format!("{},{},{},{}\n", r.n, r.runs, r.recovered, r.fraction));
    }
    emit(output, &text)
}
