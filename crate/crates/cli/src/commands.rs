use crate::output::{
    ensure_dir, to_json, write_bytes, write_manifest, CliError, CliResult, EXIT_EQUATION, EXIT_NO_TRACT, EXIT_NUMERIC,
    EXIT_USAGE,
};
use crate::presets::{self, PRESET_RES};
use crate::{GrowthArgs, ModelArgs, OdeArgs, OuterArgs, RenderArgs, TractArgs, WvArgs};
use num_complex::Complex64;
use serde_json::json;
use tractdyn::dynamics::{outer_sequence, render_with, DynamicsError, LogPolarRegion, OuterConfig, Palette, RenderSpec};
use tractdyn::exec::Exec;
use tractdyn::functions::FunctionModel;
use tractdyn::growth::{build_profile_with, GrowthError, DEFAULT_COARSE};
use tractdyn::odeorder::{monomials_from_json, order_bound, parse_equation, verify_against_growth, OdeError};
use tractdyn::tract::{locate_tract_with, TractDescriptor, TractError, Window};
use tractdyn::wvcheck::{exceptional_sweep, flagged_log_fraction, sweep_csv, wv_verify, WvError};

fn usage(msg: impl ToString) -> CliError {
    CliError::new(EXIT_USAGE, msg)
}

fn parse_floats<const N: usize>(s: &str, what: &str) -> CliResult<[f64; N]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad {what} `{s}`")))?;
    v.try_into().map_err(|_| usage(format!("{what} needs {N} comma-separated numbers, got `{s}`")))
}

fn parse_res(s: &str) -> CliResult<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| usage(format!("bad resolution `{s}`, expected WxH")))?;
    match (w.trim().parse(), h.trim().parse()) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(usage(format!("bad resolution `{s}`, expected WxH"))),
    }
}

fn build_model(spec: &str, lambda: Option<f64>) -> CliResult<FunctionModel> {
    let model = FunctionModel::parse(spec).map_err(usage)?;
    match lambda {
        Some(l) => model.with_parameter("lambda", Complex64::new(l, 0.0)).map_err(usage),
        None => Ok(model),
    }
}

fn seed_of(args: &ModelArgs) -> CliResult<Option<Complex64>> {
    args.seed
        .as_deref()
        .map(|s| parse_floats::<2>(s, "seed").map(|[re, im]| Complex64::new(re, im)))
        .transpose()
}

/// Runs `f` on a pool of `workers` threads, or sequentially for one worker.
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce(Exec) -> T + Send) -> CliResult<T> {
    match workers {
        Some(0) => Err(usage("--workers must be at least 1")),
        Some(1) => Ok(f(Exec::Sequential)),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::new(EXIT_NUMERIC, e))?;
            Ok(pool.install(|| f(Exec::Parallel)))
        }
        None => Ok(f(Exec::Parallel)),
    }
}

fn tract_err(e: TractError) -> CliError {
    match e {
        TractError::SeedBelowThreshold { .. } | TractError::SeedOutsideWindow(_) => CliError::new(EXIT_NO_TRACT, e),
        _ => usage(e),
    }
}

fn growth_err(e: GrowthError) -> CliError {
    match e {
        GrowthError::CircleMissesTract(_) => CliError::new(EXIT_NO_TRACT, e),
        GrowthError::BadRange(..) | GrowthError::TooFewSamples(_) => usage(e),
        _ => CliError::new(EXIT_NUMERIC, e),
    }
}

fn wv_err(e: WvError) -> CliError {
    match e {
        WvError::BadTau(_) | WvError::BadRectangle => usage(e),
        WvError::Growth(g) => growth_err(g),
        _ => CliError::new(EXIT_NUMERIC, e),
    }
}

fn dyn_err(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::TractNotFound(_) => CliError::new(EXIT_NO_TRACT, e),
        DynamicsError::BadMaxIter => usage(e),
        DynamicsError::Growth(g) => growth_err(g),
        _ => CliError::new(EXIT_NUMERIC, e),
    }
}

fn ode_err(e: OdeError) -> CliError {
    CliError::new(EXIT_EQUATION, e)
}

/// The tract of a model from its defaults, overridden by the flags.
fn locate(model: &FunctionModel, args: &ModelArgs, window: Option<Window>, exec: Exec) -> CliResult<TractDescriptor> {
    let d = model.tract_defaults();
    let window = match window {
        Some(w) => w,
        None => Window::from_bounds(d.window, 256, 256).map_err(usage)?,
    };
    let threshold = args.threshold.unwrap_or(d.threshold);
    let seed = seed_of(args)?.unwrap_or(d.seed);
    locate_tract_with(model, threshold, seed, window, exec).map_err(tract_err)
}

fn tract_summary(t: &TractDescriptor) -> serde_json::Value {
    json!({
        "model": t.model.id(),
        "threshold": t.threshold,
        "seed": [t.seed.re, t.seed.im],
        "window": t.raster.window.bounds(),
        "resolution": [t.raster.window.width, t.raster.window.height],
        "pixels": t.pixels,
        "areaFraction": t.area_fraction(),
        "direct": t.direct,
        "polesInside": t.poles_inside.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
        "complementBounded": t.complement_bounded,
        "logarithmic": t.logarithmic,
        "sector": t.sector,
    })
}

pub fn render(args: &RenderArgs) -> CliResult {
    let preset = args
        .preset
        .as_deref()
        .map(|p| presets::find(p).ok_or_else(|| usage(format!("unknown preset `{p}`"))))
        .transpose()?;
    let name = args.model.model.as_deref().or(preset.map(|p| p.model)).unwrap_or("exp");
    let model = build_model(name, args.model.lambda)?;
    let bounds = match (&args.window, preset) {
        (Some(w), _) => parse_floats::<4>(w, "window")?,
        (None, Some(p)) => p.window,
        (None, None) => model.tract_defaults().window,
    };
    let (width, height) = match (&args.res, preset) {
        (Some(r), _) => parse_res(r)?,
        (None, _) => PRESET_RES,
    };
    let palette_name = args.palette.as_deref().or(preset.map(|p| p.palette)).unwrap_or("fig1");
    let palette = Palette::by_name(palette_name).ok_or_else(|| usage(format!("unknown palette `{palette_name}`")))?;
    let window = Window::from_bounds(bounds, width, height).map_err(usage)?;
    if args.png && !cfg!(feature = "png") {
        return Err(usage("built without PNG support; rebuild with --features png"));
    }

    let mut spec = RenderSpec::new(model, window, palette);
    spec.threshold = args.model.threshold;
    spec.seed = seed_of(&args.model)?;
    spec.rho = args.rho;
    if let Some(n) = args.max_iter {
        spec.params.max_iter = n;
    }
    let out = with_workers(args.common.workers, |exec| render_with(&spec, exec))?.map_err(dyn_err)?;

    let dir = &args.common.out;
    ensure_dir(dir)?;
    write_bytes(dir, "image.ppm", &out.to_ppm())?;
    let mut files = vec!["image.ppm", "image.json"];
    #[cfg(feature = "png")]
    if args.png {
        let img = image::RgbImage::from_raw(out.width as u32, out.height as u32, out.rgb.clone()).expect("rgb buffer size");
        let path = dir.join("image.png");
        img.save(&path)
            .map_err(|e| CliError::new(crate::output::EXIT_IO, format!("{}: {e}", path.display())))?;
        files.push("image.png");
    }
    let effective = json!({
        "model": spec.model.id(),
        "preset": preset.map(|p| p.name),
        "window": bounds,
        "resolution": [width, height],
        "palette": palette_name,
        "maxIter": spec.params.max_iter,
        "escapeLogBound": spec.params.escape_log_bound,
        "rho": spec.rho,
    });
    let summary = json!({
        "config": effective,
        "histogram": out.histogram,
        "fixedPoints": out.fixed_points,
        "basins": out.basins,
        "tract": tract_summary(&out.tract),
    });
    write_bytes(dir, "image.json", to_json(&summary).as_bytes())?;
    files.sort();
    write_manifest(dir, "render", args, effective, &files)?;
    print!("{}", to_json(&json!({"histogram": out.histogram, "out": dir})));
    Ok(())
}

pub fn growth(args: &GrowthArgs) -> CliResult {
    let model = build_model(args.model.model.as_deref().unwrap_or("exp"), args.model.lambda)?;
    let (profile_csv, summary) = with_workers(args.common.workers, |exec| -> CliResult<_> {
        let tract = locate(&model, &args.model, None, exec)?;
        let mut profile = build_profile_with(&tract, args.rmin, args.rmax, DEFAULT_COARSE, exec).map_err(growth_err)?;
        let flagged = profile.scan_exceptional(args.alpha, args.beta);
        let a_bound = profile.check_a_bound(args.epsilon);
        let sqrt = profile.check_sqrt_growth();
        let summary = json!({
            "model": model.id(),
            "threshold": tract.threshold,
            "rows": profile.samples.len(),
            "logStep": profile.log_step,
            "minSecondDifference": profile.min_second_difference(),
            "checkABound": { "epsilon": args.epsilon, "report": a_bound },
            "checkSqrtGrowth": match sqrt {
                Ok(s) => json!(s),
                Err(e) => json!({ "error": e.to_string() }),
            },
            "scanExceptional": { "alpha": args.alpha, "beta": args.beta, "flagged": flagged },
        });
        Ok((profile.to_csv(), summary))
    })??;
    let dir = &args.common.out;
    ensure_dir(dir)?;
    write_bytes(dir, "profile.csv", profile_csv.as_bytes())?;
    write_bytes(dir, "growth.json", to_json(&summary).as_bytes())?;
    let effective = json!({ "model": model.id(), "rmin": args.rmin, "rmax": args.rmax });
    write_manifest(dir, "growth", args, effective, &["growth.json", "profile.csv"])?;
    print!("{}", to_json(&summary));
    Ok(())
}

pub fn wv_check(args: &WvArgs) -> CliResult {
    let model = build_model(args.model.model.as_deref().unwrap_or("exp"), args.model.lambda)?;
    let dir = &args.common.out;
    let result = with_workers(args.common.workers, |exec| -> CliResult<_> {
        let tract = locate(&model, &args.model, None, exec)?;
        match (args.r, args.rmin, args.rmax) {
            (Some(r), _, _) => {
                let rep = wv_verify(&tract, r, args.tau, args.samples).map_err(wv_err)?;
                Ok((json!(rep), None))
            }
            (None, Some(lo), Some(hi)) => {
                if !(args.tau > 0.5) {
                    return Err(wv_err(WvError::BadTau(args.tau)));
                }
                let entries = exceptional_sweep(&tract, lo, hi, args.log_step, args.tau, args.samples, exec);
                if entries.is_empty() {
                    return Err(usage(format!("empty sweep range [{lo}, {hi}]")));
                }
                let summary = json!({
                    "radii": entries.len(),
                    "flagged": entries.iter().filter(|e| e.flagged).map(|e| e.r).collect::<Vec<_>>(),
                    "flaggedLogFraction": flagged_log_fraction(&entries),
                });
                Ok((summary, Some(sweep_csv(&entries))))
            }
            _ => Err(usage("give --r or both --rmin and --rmax")),
        }
    })??;
    let (report, csv) = result;
    ensure_dir(dir)?;
    let mut files = vec!["wv.json"];
    write_bytes(dir, "wv.json", to_json(&report).as_bytes())?;
    if let Some(csv) = csv {
        write_bytes(dir, "sweep.csv", csv.as_bytes())?;
        files.push("sweep.csv");
    }
    let effective = json!({
        "model": model.id(),
        "tau": args.tau,
        "samples": args.samples,
        "r": args.r,
        "range": [args.rmin, args.rmax],
        "logStep": args.log_step,
    });
    write_manifest(dir, "wv-check", args, effective, &files)?;
    print!("{}", to_json(&report));
    Ok(())
}

pub fn ode_bound(args: &OdeArgs) -> CliResult {
    let monomials = match (&args.equation, &args.json) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(crate::output::EXIT_IO, format!("{}: {e}", path.display())))?;
            monomials_from_json(&text).map_err(ode_err)?
        }
        (Some(eq), None) => parse_equation(eq).map_err(|e| ode_err(e.into()))?,
        (None, None) => return Err(usage("an equation or --json is required")),
    };
    let result = order_bound(&monomials);
    let verification = if args.verify {
        let model = FunctionModel::parse("exp").expect("registered model");
        let tract = locate(
            &model,
            &ModelArgs {
                model: None,
                lambda: None,
                threshold: Some(1.0),
                seed: None,
            },
            None,
            Exec::Sequential,
        )?;
        let profile = build_profile_with(&tract, 10.0, 100.0, DEFAULT_COARSE, Exec::Sequential).map_err(growth_err)?;
        Some(verify_against_growth(&monomials, &result, &profile).map_err(ode_err)?)
    } else {
        None
    };
    let report = json!({
        "monomials": monomials,
        "result": result,
        "verification": verification,
    });
    let dir = &args.common.out;
    ensure_dir(dir)?;
    write_bytes(dir, "ode.json", to_json(&report).as_bytes())?;
    write_manifest(dir, "ode-bound", args, json!({ "verify": args.verify }), &["ode.json"])?;
    print!("{}", to_json(&report));
    Ok(())
}

pub fn outer_seq(args: &OuterArgs) -> CliResult {
    let model = build_model(args.model.model.as_deref().unwrap_or("exp"), args.model.lambda)?;
    if !(args.radius > 0.0) || args.nu < 2 || args.ntheta < 2 {
        return Err(usage("need --radius > 0 and --nu, --ntheta >= 2"));
    }
    let config = OuterConfig {
        nu: args.nu,
        ntheta: args.ntheta,
        ..OuterConfig::default()
    };
    let (steps, err) = with_workers(args.common.workers, |exec| -> CliResult<_> {
        let tract = locate(&model, &args.model, None, exec)?;
        let g0 = LogPolarRegion::disc(
            Complex64::new(0.0, 0.0),
            args.radius,
            (-0.5, args.radius.ln() + 0.5),
            args.nu / 4,
            args.ntheta / 2,
        );
        Ok(outer_sequence(&tract, &g0, args.steps, &config, exec))
    })??;
    let report = json!({
        "model": model.id(),
        "logR0": args.radius.ln(),
        "steps": steps.iter().map(|s| json!({
            "logR": s.log_r,
            "logRPrev": s.log_r_prev,
            "targetLog": s.target_log,
            "imageCells": s.image_cells,
            "gaps": s.gaps,
            "doubles": s.doubles(),
        })).collect::<Vec<_>>(),
        "stoppedBy": err.as_ref().map(|e| e.to_string()),
    });
    let dir = &args.common.out;
    ensure_dir(dir)?;
    write_bytes(dir, "outer.json", to_json(&report).as_bytes())?;
    write_manifest(dir, "outer-seq", args, json!({ "config": config }), &["outer.json"])?;
    print!("{}", to_json(&report));
    match err {
        Some(e) if steps.is_empty() => Err(dyn_err(e)),
        _ => Ok(()),
    }
}

pub fn tract_info(args: &TractArgs) -> CliResult {
    let model = build_model(args.model.model.as_deref().unwrap_or("exp"), args.model.lambda)?;
    let bounds = match &args.window {
        Some(w) => parse_floats::<4>(w, "window")?,
        None => model.tract_defaults().window,
    };
    let (w, h) = args.res.as_deref().map(parse_res).transpose()?.unwrap_or((256, 256));
    let window = Window::from_bounds(bounds, w, h).map_err(usage)?;
    let tract = with_workers(args.common.workers, |exec| locate(&model, &args.model, Some(window), exec))??;
    let summary = tract_summary(&tract);
    let dir = &args.common.out;
    ensure_dir(dir)?;
    write_bytes(dir, "tract.json", to_json(&summary).as_bytes())?;
    write_bytes(dir, "tract.pgm", &tract.raster.to_pgm())?;
    write_manifest(dir, "tract-info", args, json!({ "window": bounds, "resolution": [w, h] }), &["tract.json", "tract.pgm"])?;
    print!("{}", to_json(&summary));
    Ok(())
}
