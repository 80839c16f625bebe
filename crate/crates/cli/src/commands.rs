use std::path::{Path, PathBuf};

use races_core::explicit::{compare, select_kappa, ExplicitModel, Kappa};
use races_core::model::{build_limit_rv, density_delta, density_delta2, DEFAULT_HEIGHT, RNG_ALGORITHM};
use races_core::race::{first_sign_change, log_grid, series_from_counts, RaceConfig, SignChange};
use races_core::sieve::MAX_LIMIT;
use races_core::zeros::{
    find_zeros, load_zeros_for_modulus, save_zeros, zero_count_estimate, CharacterGroup, ZeroSet,
};

use crate::args::{
    CacheArgs, CompareArgs, DensityArgs, KappaArg, RaceArgs, RaceSelect, SignchangeArgs, Which, WhichChange,
    ZeroSourceArgs, ZerosArgs,
};
use crate::cache::{cached_counts, CountCache};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{fmt_f64, CsvWriter};

/// Sign-change points are only searched up to here when refining a race grid.
const SIGN_CHANGE_SEARCH: u64 = 10_000_000;

/// Grid start used when the requested start is not below the limit.
const TINY_GRID_START: u64 = 3;

fn config(r: &RaceSelect) -> Result<RaceConfig, CliError> {
    Ok(RaceConfig::new(r.q, r.a, r.b)?)
}

fn record_race(m: &mut RunManifest, r: &RaceSelect) {
    m.param("q", r.q).param("a", r.a).param("b", r.b);
}

fn check_limit(limit: u64) -> Result<(), CliError> {
    if !(10..=MAX_LIMIT).contains(&limit) {
        return Err(CliError::Usage(format!("--limit must be in [10, {MAX_LIMIT}], got {limit}")));
    }
    Ok(())
}

fn grid(start: u64, limit: u64, points: u64) -> Result<Vec<u64>, CliError> {
    if points < 2 {
        return Err(CliError::Usage(format!("--grid-points must be at least 2, got {points}")));
    }
    let lo = if start < limit { start.max(TINY_GRID_START) } else { TINY_GRID_START };
    Ok(log_grid(lo, limit, points as usize))
}

fn cache_for(args: &CacheArgs) -> Option<CountCache> {
    if args.no_cache {
        None
    } else {
        CountCache::resolve(args.cache_dir.clone())
    }
}

/// Zeros for every nonprincipal character: ingested from `files` (each cut to
/// `height` when given) or computed to `height` for q ∈ {3, 4}.
fn zero_set(q: u64, src: &ZeroSourceArgs, height: Option<f64>, step: f64) -> Result<ZeroSet, CliError> {
    let group = CharacterGroup::new(q)?;
    if src.files.is_empty() {
        let h = height.unwrap_or(DEFAULT_HEIGHT);
        return Ok(ZeroSet::builtin(q, h, step)?);
    }
    let mut set = ZeroSet::new(q);
    for path in &src.files {
        let mut list = load_zeros_for_modulus(path, q)?;
        if let Some(h) = height {
            if h > list.height() {
                return Err(CliError::Data(format!(
                    "{} only reaches height {}, below the requested {h}",
                    path.display(),
                    list.height()
                )));
            }
            list = list.truncated(h)?;
        }
        if set.get(list.chi_index()).is_ok() {
            return Err(CliError::Data(format!("{}: duplicate zeros for chi={}", path.display(), list.chi_index())));
        }
        set.insert(list)?;
    }
    set.common_height(&group)?;
    Ok(set)
}

fn record_zero_files(m: &mut RunManifest, src: &ZeroSourceArgs) {
    let files: Vec<String> = src.files.iter().map(|p| p.display().to_string()).collect();
    m.param("zeros", files);
}

fn finish(mut m: RunManifest, explicit: Option<&Path>, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(p) = out {
        m.outputs.push(p.to_path_buf());
    }
    let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| crate::manifest::default_path(&m.command, out));
    m.write(&path)
}

pub fn race(args: &RaceArgs, manifest: Option<&Path>) -> Result<(), CliError> {
    let cfg = config(&args.race)?;
    check_limit(args.limit)?;
    let mut m = RunManifest::start("race");
    record_race(&mut m, &args.race);
    m.param("limit", args.limit).param("grid_start", args.grid_start).param("grid_points", args.grid_points);

    let mut xs = grid(args.grid_start, args.limit, args.grid_points)?;
    // Bracket each first sign change so the crossing shows in the CSV.
    let search = args.limit.min(SIGN_CHANGE_SEARCH);
    let lo = xs[0];
    for (key, which) in [("first_delta_negative", SignChange::DeltaNegative), ("first_delta2_positive", SignChange::Delta2Positive)] {
        let found = first_sign_change(&cfg, which, search)?;
        m.result(key, found);
        if let Some(x) = found {
            xs.extend([x - 1, x].into_iter().filter(|&v| v >= lo));
        }
    }
    xs.sort_unstable();
    xs.dedup();

    let cache = cache_for(&args.cache);
    let (counts, report) = cached_counts(cfg.q, &xs, cache.as_ref())?;
    let series = series_from_counts(&cfg, &counts)?;

    let mut w = CsvWriter::create(args.out.as_deref(), &["x", "delta_norm", "delta2_norm", "sigma"])?;
    for i in 0..series.len() {
        w.row(&[
            series.grid[i].to_string(),
            fmt_f64(series.delta_norm[i]),
            fmt_f64(series.delta2_norm[i]),
            fmt_f64(series.sigma[i]),
        ])?;
    }
    w.finish()?;

    let last = series.len() - 1;
    let summary = format!(
        "x={} Delta={} Delta2={} points={} cached={}",
        series.grid[last], series.delta[last], series.delta2[last], series.len(), report.loaded
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    m.result("delta", series.delta[last]).result("delta2", series.delta2[last]).result("points", series.len());
    m.result("cache_loaded", report.loaded).result("cache_computed", report.computed);
    finish(m, manifest, args.out.as_deref())
}

pub fn zeros(args: &ZerosArgs, manifest: Option<&Path>) -> Result<(), CliError> {
    let group = CharacterGroup::new(args.q)?;
    let index = match args.chi {
        Some(i) => i,
        None => group
            .iter()
            .find(|c| !c.is_principal && c.is_real)
            .map(|c| c.index)
            .ok_or_else(|| CliError::Usage(format!("q={} has no real nonprincipal character", args.q)))?,
    };
    let chi = group.character(index)?;
    let mut m = RunManifest::start("zeros");
    m.param("q", args.q).param("chi", index).param("T", args.height).param("step", args.step);

    let list = find_zeros(&chi, args.height, args.step)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("q{}_chi{index}.zeros", args.q)));
    save_zeros(&list, &out)?;
    let estimate = zero_count_estimate(&chi, args.height);
    println!(
        "{} zeros of L(s, chi_{index} mod {}) up to T={} (estimate {:.2}) -> {}",
        list.len(),
        args.q,
        args.height,
        estimate,
        out.display()
    );
    m.result("count", list.len()).result("estimate", estimate);
    finish(m, manifest, Some(&out))
}

pub fn density(args: &DensityArgs, manifest: Option<&Path>) -> Result<(), CliError> {
    let cfg = config(&args.race)?;
    let mut m = RunManifest::start("density");
    record_race(&mut m, &args.race);
    let which = match args.which {
        Which::Delta => "delta",
        Which::Delta2 => "delta2",
    };
    m.param("which", which).param("samples", args.samples).param("step", args.step);
    record_zero_files(&mut m, &args.zeros);
    m.seed = Some(args.seed);
    m.rng = Some(RNG_ALGORITHM.to_string());

    let zeros = zero_set(cfg.q, &args.zeros, args.height, args.step)?;
    let rv = build_limit_rv(&cfg, &zeros)?;
    m.param("T", rv.zero_height);
    let est = match args.which {
        Which::Delta => density_delta(&rv, args.samples, args.seed)?,
        Which::Delta2 => density_delta2(&rv, args.samples, args.seed)?,
    };
    println!(
        "{which}({};{},{}) = {:.5} ± {:.5} (95% CI)  T={} samples={} seed={} tail_sigma={:.4}",
        cfg.q,
        cfg.a,
        cfg.b,
        est.value,
        est.half_width,
        est.zero_height,
        est.samples,
        args.seed,
        est.tail_sigma
    );
    if let Some(out) = &args.out {
        let header = ["q", "a", "b", "which", "T", "samples", "seed", "value", "ci_half_width", "tail_sigma"];
        let mut w = CsvWriter::create(Some(out), &header)?;
        w.row(&[
            cfg.q.to_string(),
            cfg.a.to_string(),
            cfg.b.to_string(),
            which.to_string(),
            fmt_f64(est.zero_height),
            est.samples.to_string(),
            args.seed.to_string(),
            fmt_f64(est.value),
            fmt_f64(est.half_width),
            fmt_f64(est.tail_sigma),
        ])?;
        w.finish()?;
    }
    m.result("value", est.value).result("ci_half_width", est.half_width).result("tail_sigma", est.tail_sigma);
    finish(m, manifest, args.out.as_deref())
}

pub fn signchange(args: &SignchangeArgs, manifest: Option<&Path>) -> Result<(), CliError> {
    let cfg = config(&args.race)?;
    check_limit(args.limit)?;
    let (name, which) = match args.which {
        WhichChange::DeltaNegative => ("delta-negative", SignChange::DeltaNegative),
        WhichChange::Delta2Positive => ("delta2-positive", SignChange::Delta2Positive),
    };
    let mut m = RunManifest::start("signchange");
    record_race(&mut m, &args.race);
    m.param("which", name).param("limit", args.limit);
    let found = first_sign_change(&cfg, which, args.limit)?;
    match found {
        Some(x) => println!("{x}"),
        None => println!("none"),
    }
    m.result("x", found);
    finish(m, manifest, None)
}

pub fn compare_cmd(args: &CompareArgs, manifest: Option<&Path>) -> Result<(), CliError> {
    let cfg = config(&args.race)?;
    check_limit(args.limit)?;
    let mut m = RunManifest::start("compare");
    record_race(&mut m, &args.race);
    m.param("T0", args.t0).param("limit", args.limit).param("grid_start", args.grid_start);
    m.param("grid_points", args.grid_points).param("step", args.step);
    record_zero_files(&mut m, &args.zeros);

    let zeros = zero_set(cfg.q, &args.zeros, Some(args.t0), args.step)?;
    let model = ExplicitModel::new(&cfg, &zeros, args.t0)?;

    let xs = grid(args.grid_start, args.limit, args.grid_points)?;
    let cache = cache_for(&args.cache);
    let (counts, _) = cached_counts(cfg.q, &xs, cache.as_ref())?;
    let series = series_from_counts(&cfg, &counts)?;

    let choice = select_kappa(&model, &series)?;
    let kappa = match args.kappa {
        KappaArg::Auto => choice.kappa,
        KappaArg::InversePhi => Kappa::InversePhi,
        KappaArg::One => Kappa::One,
    };
    let rows = compare(&model, &series, kappa)?;
    let header =
        ["x", "measured_delta_norm", "predicted_delta_norm", "measured_delta2_norm", "predicted_delta2_norm"];
    let mut w = CsvWriter::create(args.out.as_deref(), &header)?;
    for r in &rows {
        w.row(&[
            r.x.to_string(),
            fmt_f64(r.measured_delta_norm),
            fmt_f64(r.predicted_delta_norm),
            fmt_f64(r.measured_delta2_norm),
            fmt_f64(r.predicted_delta2_norm),
        ])?;
    }
    w.finish()?;

    let summary = format!(
        "rms(kappa=inverse-phi)={:.4} rms(kappa=one)={:.4} kappa={} T0={}",
        choice.rms_inverse_phi,
        choice.rms_one,
        kappa.name(),
        args.t0
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    m.param("kappa", kappa.name());
    m.result("rms_inverse_phi", choice.rms_inverse_phi).result("rms_one", choice.rms_one);
    m.result("kappa_auto", choice.kappa.name());
    finish(m, manifest, args.out.as_deref())
}
