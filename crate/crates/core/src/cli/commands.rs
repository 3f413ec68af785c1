use super::files::{
    load_model, matrix_rows, Convention, Coords, LoadedModel, ModelFile, PresetSpec, StateFile, MODEL_SCHEMA,
};
use super::output::{cx_fields, header, num, Table};
use super::{spin_cap, CliError, Command, Common, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use crate::boundary::{validate, ValidationOptions};
use crate::dynamics::{evolve_spectral, free_evolve, SpectralParams};
use crate::error::Error;
use crate::krein::{gamma_dressed, gamma_free, near_pole_threshold, KernelOptions, ResolventKernel};
use crate::quadrature::QuadOptions;
use crate::scalar::Cx;
use crate::space::{Dimension, Point};
use crate::spectral::{find_bound_states, find_embedded_eigenvalues, SearchOptions};
use crate::state::{GaussianPacket, Grid1, SpinState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

pub(super) fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Validate { common } => cmd_validate(&common, stdout),
        Command::Kernel { common, z, points, seed, count } => {
            cmd_kernel(&common, &z, points.as_deref(), seed, count, stdout)
        }
        Command::Boundstates { common, emin, scan_points } => cmd_boundstates(&common, emin, scan_points, stdout),
        Command::Gamma { common, z } => cmd_gamma(&common, &z, stdout),
        Command::Evolve { common, state, t, nodes, epsilon, grid_points } => {
            cmd_evolve(&common, &state, &t, nodes, epsilon, grid_points)
        }
        Command::Preset { name, dim, n, params, alpha, spacing, paper_literal, explicit, out } => cmd_preset(
            &name,
            dim,
            n,
            &params,
            alpha.as_deref(),
            spacing,
            paper_literal,
            explicit,
            out.as_deref(),
            stdout,
        ),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load(common: &Common) -> Result<LoadedModel, CliError> {
    load_model(&read(&common.model)?, common.paper_literal, spin_cap()?)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::input(format!("stdout: {e}"))),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::input(format!("{what}: {v:?} is not a number"))))
        .collect()
}

fn parse_z(s: &str) -> Result<Cx<f64>, CliError> {
    match parse_list(s, "--z")?.as_slice() {
        [re, im] => Ok(Cx::new(*re, *im)),
        _ => Err(CliError::input(format!("--z expects re,im, got {s:?}"))),
    }
}

fn validation_options(tol: Option<f64>) -> ValidationOptions<f64> {
    ValidationOptions { hermiticity_tol: tol, ..ValidationOptions::default() }
}

fn tol_text(v: &ValidationOptions<f64>, hermiticity: f64) -> String {
    format!("hermiticity={} rank_rtol={}", num(hermiticity), num(v.rank_rtol))
}

fn cmd_validate(common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let m = load(common)?;
    let opts = validation_options(common.tol);
    let r = validate(&m.pair, &opts);
    let sv: Vec<String> = r.singular_values.iter().map(|&s| num(s)).collect();
    let lines = [
        "# command: validate".to_string(),
        format!("# input-sha256: {}", m.digest),
        format!("# tolerances: {}", tol_text(&opts, r.hermiticity_tol)),
        format!("valid: {}", r.is_valid),
        format!("local: {}", r.is_local),
        format!("hermiticity_defect: {}", num(r.hermiticity_defect)),
        format!("rank: {}/{}", r.rank_estimate, r.size),
        format!("singular_values: {}", sv.join(";")),
    ];
    let mut text = lines.join("\n");
    text.push('\n');
    emit(common.out.as_deref(), &text, stdout)?;
    Ok(if r.is_valid { EXIT_OK } else { EXIT_VALIDATION })
}

struct KernelPoint {
    x: Point<f64>,
    sigma: usize,
    xp: Point<f64>,
    sigma_p: usize,
}

fn parse_points(text: &str, dim: Dimension, nc: usize) -> Result<Vec<KernelPoint>, CliError> {
    let width = if dim == Dimension::One { 1 } else { 3 };
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let v = parse_list(line, &format!("points line {}", ln + 1))?;
        if v.len() != 2 * width + 2 {
            return Err(CliError::input(format!("points line {}: expected {} columns", ln + 1, 2 * width + 2)));
        }
        let point = |s: &[f64]| if width == 1 { Point::line(s[0]) } else { Point::space(s[0], s[1], s[2]) };
        let code = |c: f64| {
            if c >= 0.0 && c.fract() == 0.0 && (c as usize) < nc {
                Ok(c as usize)
            } else {
                Err(CliError::input(format!("points line {}: configuration {c} not in 0..{nc}", ln + 1)))
            }
        };
        out.push(KernelPoint {
            x: point(&v[..width]),
            sigma: code(v[width])?,
            xp: point(&v[width + 1..2 * width + 1]),
            sigma_p: code(v[2 * width + 1])?,
        });
    }
    Ok(out)
}

fn random_points(rng: &mut ChaCha8Rng, dim: Dimension, nc: usize, count: usize) -> Vec<KernelPoint> {
    let mut p = || match dim {
        Dimension::One => Point::line(rng.gen_range(-2.0..2.0)),
        Dimension::Three => Point::space(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
    };
    let pts: Vec<(Point<f64>, Point<f64>)> = (0..count).map(|_| (p(), p())).collect();
    pts.into_iter()
        .map(|(x, xp)| KernelPoint { x, sigma: rng.gen_range(0..nc), xp, sigma_p: rng.gen_range(0..nc) })
        .collect()
}

fn point_fields(p: &Point<f64>, dim: Dimension) -> Vec<String> {
    match dim {
        Dimension::One => vec![num(p.x())],
        Dimension::Three => p.coords().iter().map(|&c| num(c)).collect(),
    }
}

fn cmd_kernel(
    common: &Common,
    z: &str,
    points: Option<&Path>,
    seed: u64,
    count: usize,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let m = load(common)?;
    let z = parse_z(z)?;
    let dim = m.model.dim();
    let nc = m.model.config_count();
    let (pts, points_meta) = match points {
        Some(p) => {
            let bytes = read(p)?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::input("points file is not UTF-8"))?;
            (parse_points(&text, dim, nc)?, format!("file sha256 {}", super::files::sha256_hex(&bytes)))
        }
        None => (
            random_points(&mut ChaCha8Rng::seed_from_u64(seed), dim, nc, count),
            format!("random seed {seed} count {count}"),
        ),
    };
    let opts = KernelOptions {
        unchecked: common.unchecked,
        validation: validation_options(common.tol),
        ..KernelOptions::default()
    };
    let kernel = match ResolventKernel::new(&m.model, &m.pair, z, &opts) {
        Ok(k) => Some(k),
        Err(Error::NearPole { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let (xs, xps): (Vec<&str>, Vec<&str>) = if dim == Dimension::One {
        (vec!["x"], vec!["xp"])
    } else {
        (vec!["x1", "x2", "x3"], vec!["xp1", "xp2", "xp3"])
    };
    let mut cols = xs.clone();
    cols.push("sigma");
    cols.extend(xps.iter());
    cols.extend(["sigmap", "re", "im", "status"]);
    let condition = kernel.as_ref().map_or(f64::INFINITY, |k| k.condition());
    let meta = [
        (
            "command",
            format!("kernel --z {},{}{}", num(z.re), num(z.im), if common.unchecked { " --unchecked" } else { "" }),
        ),
        ("input-sha256", m.digest.clone()),
        ("points", points_meta),
        (
            "tolerances",
            format!(
                "near_pole_condition={} quad_abs={}",
                num(near_pole_threshold::<f64>()),
                num(QuadOptions::<f64>::default().abs_tol)
            ),
        ),
        ("condition", num(condition)),
    ];
    let mut table = Table::new(&meta, &header(&cols));
    let mut flagged = false;
    for p in &pts {
        let mut row = point_fields(&p.x, dim);
        row.push(p.sigma.to_string());
        row.extend(point_fields(&p.xp, dim));
        row.push(p.sigma_p.to_string());
        let status = match &kernel {
            None => Err("near-pole"),
            Some(k) => k.eval(p.x, p.sigma, p.xp, p.sigma_p).map_err(|e| match e {
                Error::AtSpinSite(_) => "at-site",
                Error::SingularPoint => "coincident",
                _ => "error",
            }),
        };
        match status {
            Ok(v) => {
                row.extend(cx_fields(v));
                row.push("ok".into());
            }
            Err(flag) => {
                flagged = true;
                row.extend([String::new(), String::new(), flag.to_string()]);
            }
        }
        table.row(&row);
    }
    emit(common.out.as_deref(), &table.into_string(), stdout)?;
    Ok(if flagged { EXIT_NUMERICAL } else { EXIT_OK })
}

fn cmd_boundstates(
    common: &Common,
    emin: Option<f64>,
    scan_points: usize,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let m = load(common)?;
    let mut opts =
        SearchOptions { e_min: emin, points: scan_points, unchecked: common.unchecked, ..SearchOptions::default() };
    if let Some(t) = common.tol {
        opts.tol = t;
    }
    let r = find_bound_states(&m.model, &m.pair, &opts)?;
    let embedded = find_embedded_eigenvalues(&m.model, &m.pair, &opts)?;
    let dimm = m.model.index_dimension();
    let mut cols = header(&["energy", "smallest_singular_value", "multiplicity"]);
    for k in 0..dimm {
        cols.push(format!("c{k}_re"));
        cols.push(format!("c{k}_im"));
    }
    let mut meta = vec![
        (
            "command",
            format!("boundstates --scan-points {scan_points}{}", if common.unchecked { " --unchecked" } else { "" }),
        ),
        ("input-sha256", m.digest.clone()),
        ("tolerances", format!("root={} multiplicity={}", num(opts.tol), num(1e3 * opts.tol))),
        ("window", format!("{} {}", num(r.e_min), num(r.e_max))),
    ];
    for e in &embedded.states {
        meta.push(("embedded", format!("{} multiplicity {}", num(e.energy), e.multiplicity_estimate)));
    }
    for u in &r.unconverged {
        meta.push((
            "unconverged",
            format!(
                "{} {} best {} relative_sv {}",
                num(u.lower),
                num(u.upper),
                num(u.best_energy),
                num(u.relative_singular_value)
            ),
        ));
    }
    let mut table = Table::new(&meta, &cols);
    for s in &r.states {
        let mut row = vec![num(s.energy), num(s.smallest_singular_value), s.multiplicity_estimate.to_string()];
        for c in &s.charges {
            row.extend(cx_fields(*c));
        }
        table.row(&row);
    }
    emit(common.out.as_deref(), &table.into_string(), stdout)?;
    Ok(if r.unconverged.is_empty() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_gamma(common: &Common, z: &str, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let m = load(common)?;
    let z = parse_z(z)?;
    let g = gamma_free(&m.model, z)?;
    let d = gamma_dressed(&m.pair, &g)?;
    let meta = [
        ("command", format!("gamma --z {},{}", num(z.re), num(z.im))),
        ("input-sha256", m.digest.clone()),
        ("tolerances", "none".to_string()),
    ];
    let mut table = Table::new(&meta, &header(&["row", "col", "gamma_re", "gamma_im", "dressed_re", "dressed_im"]));
    let n = g.entries.rows();
    for r in 0..n {
        for c in 0..n {
            let mut row = vec![r.to_string(), c.to_string()];
            row.extend(cx_fields(g.entries[(r, c)]));
            row.extend(cx_fields(d.entries[(r, c)]));
            table.row(&row);
        }
    }
    emit(common.out.as_deref(), &table.into_string(), stdout)?;
    Ok(EXIT_OK)
}

/// Grid covering the packet at `t = 0` and under free motion up to `t_max`.
fn default_grid(
    model: &crate::spinspace::ModelSpec<f64>,
    packet: &GaussianPacket<f64>,
    times: &[f64],
    points: usize,
) -> Result<Grid1<f64>, CliError> {
    let mut span: Option<(f64, f64)> = None;
    let mut add = |p: &GaussianPacket<f64>| {
        for s in 0..p.channel_count() {
            if let Some((lo, hi)) = p.support_1d(s) {
                span = Some(span.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))));
            }
        }
    };
    add(packet);
    for &t in times {
        add(&free_evolve(model, packet, t)?);
    }
    let (lo, hi) = span.ok_or_else(|| CliError::input("state has no terms"))?;
    Ok(Grid1::spanning(lo, hi, points)?)
}

fn cmd_evolve(
    common: &Common,
    state: &Path,
    t: &str,
    nodes: usize,
    epsilon: Option<f64>,
    grid_points: usize,
) -> Result<i32, CliError> {
    let m = load(common)?;
    let dir = common.out.as_deref().ok_or_else(|| CliError::input("evolve needs --out DIR"))?;
    let state_bytes = read(state)?;
    let sf = StateFile::parse(&state_bytes)?;
    let packet = sf.packet(&m.model)?;
    let times = parse_list(t, "--t")?;
    let grid = match sf.grid()? {
        Some(g) => g,
        None => default_grid(&m.model, &packet, &times, grid_points)?,
    };
    let drift_tol = common.tol.unwrap_or(1e-2);
    let params = SpectralParams {
        epsilon,
        nodes,
        drift_tol: None,
        search: SearchOptions { unchecked: common.unchecked, ..SearchOptions::default() },
        ..SpectralParams::default()
    };
    let ev = evolve_spectral(&m.model, &m.pair, &SpinState::Gaussian(packet), &grid, &times, &params)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let meta = vec![
        ("command", format!("evolve --t {t} --nodes {nodes}{}", if common.unchecked { " --unchecked" } else { "" })),
        ("input-sha256", m.digest.clone()),
        ("state-sha256", super::files::sha256_hex(&state_bytes)),
        (
            "tolerances",
            format!(
                "epsilon={} lambda={}..{} nodes={} drift={} quad_abs={}",
                num(ev.epsilon),
                num(ev.lambda_min),
                num(ev.lambda_max),
                ev.nodes,
                num(drift_tol),
                num(params.quad.abs_tol)
            ),
        ),
        ("grid", format!("{} {} {}", num(grid.start), num(grid.end()), grid.len)),
        ("initial-norm", num(ev.initial_norm)),
        ("bound-states", ev.bound.iter().map(|b| num(b.energy)).collect::<Vec<_>>().join(";")),
    ];
    let nc = m.model.config_count();
    let mut cols = header(&["t", "norm", "norm_drift", "error_estimate"]);
    cols.extend((0..nc).map(|s| format!("weight_{s}")));
    let mut summary = Table::new(&meta, &cols);
    let mut drifted = Vec::new();
    for (k, s) in ev.snapshots.iter().enumerate() {
        let mut row = vec![num(s.t), num(s.norm), num(s.norm_drift), num(s.error_estimate)];
        row.extend(s.channel_weights.iter().map(|&w| num(w)));
        summary.row(&row);
        if !(s.norm_drift <= drift_tol) {
            drifted.push(format!("t={} drift={}", num(s.t), num(s.norm_drift)));
        }
        let mut snap_meta = meta.clone();
        snap_meta.push(("t", num(s.t)));
        let mut snap = Table::new(&snap_meta, &header(&["x", "sigma", "re", "im"]));
        for sigma in 0..nc {
            for (i, x) in grid.points().into_iter().enumerate() {
                let mut row = vec![num(x), sigma.to_string()];
                row.extend(cx_fields(s.state.channels[sigma][i]));
                snap.row(&row);
            }
        }
        write_file(&dir.join(format!("snapshot_{k}.csv")), &snap.into_string())?;
    }
    write_file(&dir.join("norms.csv"), &summary.into_string())?;
    if drifted.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(CliError::numerical(format!("norm drift beyond {}: {}", num(drift_tol), drifted.join(", "))))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn site_pairs(params: &[String], n: usize) -> Result<Vec<[f64; 2]>, CliError> {
    let per: Vec<[f64; 2]> = params
        .iter()
        .map(|p| match parse_list(p, "--param")?.as_slice() {
            [a, b] => Ok([*a, *b]),
            [a] => Ok([*a, *a]),
            _ => Err(CliError::input(format!("--param {p:?}: expected p+,p−"))),
        })
        .collect::<Result<_, _>>()?;
    broadcast(per, n)
}

fn broadcast<V: Clone>(per: Vec<V>, n: usize) -> Result<Vec<V>, CliError> {
    match per.len() {
        1 => Ok(vec![per[0].clone(); n]),
        k if k == n => Ok(per),
        k => Err(CliError::input(format!("{k} --param values for {n} sites"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_preset(
    name: &str,
    dim: usize,
    n: usize,
    params: &[String],
    alpha: Option<&str>,
    spacing: f64,
    paper_literal: bool,
    explicit: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let d = Dimension::from_value(dim)?;
    let preset = match name {
        "free" => PresetSpec::Free,
        "delta" => PresetSpec::Delta {
            beta: site_pairs(params, n)?,
            convention: if paper_literal { Convention::PaperLiteral } else { Convention::Stated },
        },
        "offdiag" => PresetSpec::Offdiag { betahat: site_pairs(params, n)? },
        "delta-prime" => {
            let g: Vec<f64> =
                params.iter().map(|p| parse_list(p, "--param").map(|v| v[0])).collect::<Result<_, _>>()?;
            PresetSpec::DeltaPrime { gamma: broadcast(g, n)? }
        }
        other => return Err(CliError::input(format!("unknown preset {other:?}"))),
    };
    let alpha = match alpha {
        Some(a) => broadcast(parse_list(a, "--alpha")?, n)?,
        None => vec![0.0; n],
    };
    let positions = (0..n)
        .map(|j| {
            let x = spacing * j as f64;
            match d {
                Dimension::One => Coords::Scalar(x),
                Dimension::Three => Coords::Vector(vec![x, 0.0, 0.0]),
            }
        })
        .collect();
    let mut file = ModelFile {
        schema: MODEL_SCHEMA.into(),
        dimension: dim,
        positions,
        alpha,
        preset: Some(preset),
        a: None,
        b: None,
    };
    let (_, pair) = file.build(false, spin_cap()?)?;
    if explicit {
        file.preset = None;
        file.a = Some(matrix_rows(pair.a()));
        file.b = Some(matrix_rows(pair.b()));
    }
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    emit(out, &text, stdout)?;
    Ok(EXIT_OK)
}
