use crate::config::{check_x, config_err, parse_window, CliError, Experiment, FormSource, PRule};
use crate::output::{Output, Table};
use crate::{Common, ThresholdArgs};
use hiw_core::hecke::{apply_tp2, extract_eigenvalue, shimura_relation_check, LambdaMap};
use hiw_core::progsums::{
    class_sums, estimate_cf, holder_abs_first_moment, moment_verdict, progression_e,
    MomentTolerances,
};
use hiw_core::qseries::{read_qexp, write_qexp};
use hiw_core::signstats::{
    class_survey, classify_ab, corollary_count, count_t, eigen_survey, sign_counts, Sign,
    SurveyThresholds,
};
use hiw_core::voronoi::{rearranged_e_check, voronoi_refine, BKernel, FrickePair};
use hiw_core::{builtin_form, CoeffView, Window};
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn f6(v: f64) -> String {
    format!("{v:.6e}")
}

/// c_f from the smoothed second moment at x/10 and x (or x alone when
/// x/10 is small).
fn cf_for(f: CoeffView<'_>, w: &Window, x: f64, given: Option<f64>) -> Result<f64, CliError> {
    if let Some(cf) = given {
        if !(cf > 0.0) {
            return config_err(format!("--cf must be positive, got {cf}"));
        }
        return Ok(cf);
    }
    let xs: Vec<f64> = if x / 10.0 >= 1000.0 {
        vec![x / 10.0, x]
    } else {
        vec![x]
    };
    Ok(estimate_cf(f, w, &xs)?.extrapolated)
}

fn thresholds(t: &ThresholdArgs, cf: f64, w: &Window) -> Result<SurveyThresholds, CliError> {
    let mut th = SurveyThresholds::defaults(cf, w);
    th.r = t.r.unwrap_or(th.r);
    th.m1 = t.m1.unwrap_or(th.m1);
    th.m2 = t.m2.unwrap_or(th.m2);
    th.m = t.m.unwrap_or(th.m);
    th.delta = t.delta.unwrap_or(th.delta);
    if !(th.r > 0.0 && th.r < 1.0 / 48.0) {
        return config_err(format!("--r must lie in (0, 1/48), got {}", th.r));
    }
    for (name, v) in [
        ("m1", th.m1),
        ("m2", th.m2),
        ("m", th.m),
        ("delta", th.delta),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return config_err(format!("--{name} must be positive, got {v}"));
        }
    }
    Ok(th)
}

/// `n` distinct classes in 1..p picked by the seeded generator.
fn spot_classes(p: u64, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n.min(p as usize - 1);
    let mut v: Vec<u64> = sample(&mut rng, p as usize - 1, k)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    v.sort_unstable();
    v
}

pub fn form(name: &str, trunc: u64, c: &Common) -> Result<Output, CliError> {
    if trunc == 0 {
        return config_err("--trunc must be at least 1");
    }
    let s = builtin_form(name, trunc)?;
    let mut out = Output {
        json_to_stdout: true,
        ..Output::default()
    };
    if let Some(path) = &c.out {
        write_qexp(&s, path)?;
        let back = read_qexp(path)?;
        out.check(
            "written file reads back to the same series",
            back.series == s,
        );
    }
    let first: Vec<String> = (1..=trunc.min(10))
        .map(|n| s.coeff(n).map(|v| v.to_string()))
        .collect::<Result<_, _>>()?;
    out.json = json!({
        "command": "form",
        "name": name,
        "weight": s.weight().to_string(),
        "level": s.level(),
        "character": s.character().to_string(),
        "truncation": s.truncation(),
        "nonzero_coefficients": s.support().len(),
        "first_coefficients": first,
        "file": c.out,
    });
    let a = s.normalized();
    out.plots.push((
        "coefficients",
        (1..=trunc.min(10_000))
            .map(|n| (n as f64, a[n as usize]))
            .collect(),
    ));
    Ok(out)
}

pub fn sums(cfg: &Experiment) -> Result<Output, CliError> {
    let f = cfg.load()?;
    let x = cfg.xs[0];
    let p = cfg.p_rule.prime_for(x);
    let r = progression_e(f.view(), &cfg.window, x, p)?;
    let cs = class_sums(f.view(), &cfg.window, x, p)?;
    let mut out = Output::default();
    let class_total: f64 = cs.s1.iter().sum();
    out.check(
        "class sums add up to the total sum",
        (class_total - r.total_sum).abs() <= 1e-9 * cs.abs1.iter().sum::<f64>().max(1.0),
    );
    out.check(
        "Hölder lower bound for the mean |E|",
        holder_abs_first_moment(&r)?.holds,
    );
    out.table = Some(Table {
        headers: vec!["a", "E", "S2", "S4", "S_abs"],
        rows: (0..p as usize)
            .map(|a| {
                vec![
                    a.to_string(),
                    f6(r.e_values[a]),
                    f6(cs.s2[a]),
                    f6(cs.s4[a]),
                    f6(cs.abs1[a]),
                ]
            })
            .collect(),
    });
    out.plots.push((
        "E",
        r.e_values
            .iter()
            .enumerate()
            .map(|(a, &e)| (a as f64, e))
            .collect(),
    ));
    out.json = json!({ "command": "sums", "config": cfg, "report": r });
    Ok(out)
}

pub fn moments(cfg: &Experiment, cf_x: &[f64]) -> Result<Output, CliError> {
    for &x in cf_x {
        check_x(x)?;
    }
    let cf_xs = if cf_x.is_empty() {
        cfg.xs.clone()
    } else {
        cf_x.to_vec()
    };
    let need = cf_xs.iter().copied().fold(cfg.x_max(), f64::max);
    let f = cfg.form.load(need.floor() as u64)?;
    let cf = estimate_cf(f.view(), &cfg.window, &cf_xs)?;
    let mut out = Output::default();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for &x in &cfg.xs {
        let p = cfg.p_rule.prime_for(x);
        let r = progression_e(f.view(), &cfg.window, x, p)?;
        let v = moment_verdict(
            &r,
            cf.extrapolated,
            &cfg.window,
            MomentTolerances::default(),
        )?;
        let h = holder_abs_first_moment(&r)?;
        out.check(format!("Hölder chain at x={x}"), h.holds);
        if v.in_range {
            out.check(
                format!("m2 within tolerance of c_f‖w‖² at x={x}"),
                v.m2_pass,
            );
            out.check(format!("m4± within 12(c_f‖w‖²)² bound at x={x}"), v.m4_pass);
        }
        rows.push(vec![
            x.to_string(),
            p.to_string(),
            f6(v.m2_ratio),
            f6(v.m4_plus_ratio),
            f6(v.m4_minus_ratio),
        ]);
        plot.push((x, v.m2_ratio));
        runs.push(json!({
            "x": x, "p": p, "m2": r.m2, "m4_plus": r.m4_plus, "m4_minus": r.m4_minus, "m4": r.m4,
            "abs_m1": r.abs_m1, "total_sum": r.total_sum, "verdict": v, "holder": h,
        }));
    }
    out.table = Some(Table {
        headers: vec!["x", "p", "m2_ratio", "m4_plus_ratio", "m4_minus_ratio"],
        rows,
    });
    out.plots.push(("m2_ratio", plot));
    out.json = json!({ "command": "moments", "config": cfg, "cf_estimate": cf, "runs": runs });
    Ok(out)
}

pub fn voronoi(q: u64, u: i64, x: f64, m_cap: u64, window: &str) -> Result<Output, CliError> {
    check_x(x)?;
    if q % 2 == 0 || q == 0 {
        return config_err(format!("--q must be odd and positive, got {q}"));
    }
    let w = parse_window(window)?;
    let pair = FrickePair::theta_delta(x.ceil() as u64, m_cap)?;
    let kernel = BKernel::new(&w, pair.ell)?;
    let r = voronoi_refine(&pair, &kernel, u, q, x, 1_000.min(m_cap), m_cap)?;
    let mut out = Output::default();
    out.check("relative residual below 1e-6", r.last().rel_residual < 1e-6);
    out.check("dual sum converged", r.converged);
    out.table = Some(Table {
        headers: vec!["m_max", "abs_residual", "rel_residual"],
        rows: r
            .steps
            .iter()
            .map(|s| vec![s.m_max.to_string(), f6(s.abs_residual), f6(s.rel_residual)])
            .collect(),
    });
    out.plots.push((
        "residual",
        r.steps
            .iter()
            .map(|s| (s.m_max as f64, s.rel_residual))
            .collect(),
    ));
    out.json = json!({ "command": "voronoi", "window": w, "refinement": r });
    Ok(out)
}

pub fn rearrange(
    x: f64,
    rule: PRule,
    eta: f64,
    classes: &[u64],
    m_full: u64,
    window: &str,
) -> Result<Output, CliError> {
    check_x(x)?;
    if !(eta > 0.0 && eta < 1.0) {
        return config_err(format!("--eta must lie in (0, 1), got {eta}"));
    }
    let w = parse_window(window)?;
    let p = rule.prime_for(x);
    let classes: Vec<u64> = if classes.is_empty() {
        let mut v: Vec<u64> = (0..24u64).map(|k| 1 + k * (p - 1) / 24).collect();
        v.dedup();
        v
    } else {
        classes.to_vec()
    };
    if let Some(a) = classes.iter().find(|&&a| a % p == 0) {
        return config_err(format!("class {a} is divisible by p = {p}"));
    }
    let pair = FrickePair::theta_delta(x.ceil() as u64, m_full)?;
    let kernel = BKernel::new(&w, pair.ell)?;
    let reps = rearranged_e_check(&pair, &kernel, x, p, &classes, eta, Some(m_full))?;
    let worst_trunc = reps
        .iter()
        .map(|r| r.truncated_residual)
        .fold(0.0, f64::max);
    let worst_full = reps.iter().map(|r| r.full_residual).fold(0.0, f64::max);
    let mut out = Output::default();
    out.check(
        "truncated rearrangement matches E to 1e-4",
        worst_trunc < 1e-4,
    );
    out.check(
        "untruncated rearrangement matches E to 1e-6",
        worst_full < 1e-6,
    );
    out.table = Some(Table {
        headers: vec![
            "a",
            "E",
            "main_term",
            "truncated_residual",
            "full_value",
            "full_residual",
        ],
        rows: reps
            .iter()
            .map(|r| {
                vec![
                    r.a.to_string(),
                    f6(r.e_direct),
                    f6(r.main_term),
                    f6(r.truncated_residual),
                    f6(r.full_value),
                    f6(r.full_residual),
                ]
            })
            .collect(),
    });
    out.plots.push((
        "truncated_residual",
        reps.iter()
            .map(|r| (r.a as f64, r.truncated_residual))
            .collect(),
    ));
    out.json = json!({
        "command": "rearrange", "x": x, "p": p, "eta": eta, "window": w,
        "max_truncated_residual": worst_trunc, "max_full_residual": worst_full, "classes": reps,
    });
    Ok(out)
}

pub fn hecke(form: &FormSource, p: u64, n_probe: u64) -> Result<Output, CliError> {
    if n_probe == 0 {
        return config_err("--n-probe must be at least 1");
    }
    let f = form.load(p.saturating_mul(p).saturating_mul(n_probe))?;
    let r = extract_eigenvalue(&f, p, n_probe)?;
    let t = apply_tp2(&f, p)?;
    let image: Vec<String> = (1..=t.truncation().min(20))
        .map(|n| t.coeff(n).map(|v| v.to_string()))
        .collect::<Result<_, _>>()?;
    let mut out = Output::default();
    out.check(format!("f is an eigenform of T_{{{p}²}}"), r.is_eigen);
    out.json =
        json!({ "command": "hecke", "form": form, "result": r, "image_first_coefficients": image });
    Ok(out)
}

fn parse_lambda(s: &str) -> Result<(u64, BigRational), CliError> {
    let (p, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--lambda `{s}`: expected P=VALUE")))?;
    let p: u64 = p
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--lambda `{s}`: bad prime")))?;
    let v: BigRational = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--lambda `{s}`: bad rational")))?;
    Ok((p, v))
}

pub fn shimura(form: &FormSource, t: u64, nmax: u64, given: &[String]) -> Result<Output, CliError> {
    if t == 0 || nmax == 0 {
        return config_err("--t and --nmax must be positive");
    }
    const PROBES: u64 = 200;
    let primes: Vec<u64> = (2..=nmax)
        .filter(|&q| hiw_core::modarith::is_prime(q))
        .collect();
    let need = primes
        .iter()
        .map(|q| q * q * PROBES)
        .max()
        .unwrap_or(0)
        .max(t * nmax * nmax);
    let f = form.load(need)?;
    let mut lambdas = LambdaMap::new();
    for s in given {
        let (p, v) = parse_lambda(s)?;
        lambdas.insert(p, v);
    }
    for &q in &primes {
        if f.level() % q == 0 {
            if !lambdas.contains_key(&q) {
                return config_err(format!(
                    "λ({q}) is needed and {q} divides the level; pass --lambda {q}=VALUE"
                ));
            }
        } else {
            let r = extract_eigenvalue(&f, q, PROBES)?;
            lambdas.insert(q, r.lambda);
        }
    }
    let chk = shimura_relation_check(&f, &lambdas, t, nmax)?;
    let mut out = Output::default();
    out.check("Shimura relation holds exactly", chk.max_residual == 0.0);
    let lam: serde_json::Map<String, serde_json::Value> = lambdas
        .iter()
        .map(|(p, v)| (p.to_string(), json!(v.to_string())))
        .collect();
    out.table = Some(Table {
        headers: vec!["n", "c_tn2", "predicted"],
        rows: chk
            .rows
            .iter()
            .map(|(n, a, b)| vec![n.to_string(), a.clone(), b.clone()])
            .collect(),
    });
    out.json = json!({ "command": "shimura", "form": form, "lambdas": lam, "check": chk });
    Ok(out)
}

pub fn signs(
    form: &FormSource,
    x: f64,
    alpha: f64,
    q: u64,
    window: Option<&str>,
    seed: u64,
) -> Result<Output, CliError> {
    check_x(x)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return config_err(format!("--alpha must lie in (0, 1), got {alpha}"));
    }
    if q == 0 {
        return config_err("--p must be at least 1");
    }
    let w = window.map(parse_window).transpose()?;
    let f = form.load(x.floor() as u64)?;
    let r = sign_counts(f.view(), x, alpha, q, w.as_ref())?;
    let mut out = Output::default();
    let spot = if q == 1 {
        vec![0]
    } else {
        spot_classes(q, 16, seed)
    };
    let mut agree = true;
    for &a in &spot {
        agree &= count_t(f.view(), x, alpha, a, q, Sign::Plus, w.as_ref())?
            == r.per_class_plus[a as usize];
        agree &= count_t(f.view(), x, alpha, a, q, Sign::Minus, w.as_ref())?
            == r.per_class_minus[a as usize];
    }
    out.check("seeded recount of sample classes agrees", agree);
    out.table = Some(Table {
        headers: vec!["a", "T+", "T-"],
        rows: (0..q as usize)
            .map(|a| {
                vec![
                    a.to_string(),
                    r.per_class_plus[a].to_string(),
                    r.per_class_minus[a].to_string(),
                ]
            })
            .collect(),
    });
    out.plots.push((
        "t_plus",
        r.per_class_plus
            .iter()
            .enumerate()
            .map(|(a, &t)| (a as f64, t as f64))
            .collect(),
    ));
    out.json = json!({
        "command": "signs", "form": form, "seed": seed, "window": w,
        "total_plus": r.total_plus(), "total_minus": r.total_minus(), "report": r,
    });
    Ok(out)
}

fn class_rows(e: &[f64], tp: &[u64], tm: &[u64], in_a: &[bool], in_b: &[bool]) -> Table {
    Table {
        headers: vec!["a", "E", "T+", "T-", "inA", "inB"],
        rows: (0..e.len())
            .map(|a| {
                vec![
                    a.to_string(),
                    f6(e[a]),
                    tp[a].to_string(),
                    tm[a].to_string(),
                    u8::from(in_a[a]).to_string(),
                    u8::from(in_b[a]).to_string(),
                ]
            })
            .collect(),
    }
}

pub fn survey(
    cfg: &Experiment,
    mode: &str,
    alpha: Option<f64>,
    t: &ThresholdArgs,
    seed: u64,
) -> Result<Output, CliError> {
    let x = cfg.xs[0];
    let eigen = mode == "eigen";
    let alpha = alpha.unwrap_or(if eigen { 0.14 } else { 0.23 });
    if eigen && !(alpha > 0.125 && alpha <= 1.0 / 7.0) {
        return config_err(format!(
            "--alpha {alpha} is outside the admissible interval (1/8, 1/7] for --mode eigen"
        ));
    }
    if !eigen && !(alpha > 3.0 / 14.0 && alpha <= 0.25) {
        return config_err(format!(
            "--alpha {alpha} is outside the admissible interval (3/14, 1/4] for --mode plain"
        ));
    }
    let f = cfg.load()?;
    let w = &cfg.window;
    let p = cfg.p_rule.prime_for(x);
    let cf = cf_for(f.view(), w, x, t.cf)?;
    let th = thresholds(t, cf, w)?;
    let cs = class_sums(f.view(), w, x, p)?;
    let sets = classify_ab(&cs.s1, &cs.s2, &cs.s4, x, p, th.m, th.delta);
    let mut out = Output::default();
    if eigen {
        let s = eigen_survey(f.view(), w, x, p, alpha, th.m, th.delta)?;
        out.check("p inside the window (x^{1/2}, x^{4α})", !s.out_of_range);
        out.check(
            "Hölder lower bound holds on every class of A",
            s.holder_violations == 0,
        );
        out.check("A is nonempty", s.size_a > 0);
        out.table = Some(class_rows(
            &s.e_values,
            &s.t_plus,
            &s.t_minus,
            &s.sets.in_a,
            &s.sets.in_b,
        ));
        out.plots.push((
            "E",
            s.e_values
                .iter()
                .enumerate()
                .map(|(a, &e)| (a as f64, e))
                .collect(),
        ));
        out.json = json!({ "command": "survey", "mode": mode, "config": cfg, "cf": cf, "thresholds": th, "survey": s });
    } else {
        let s = class_survey(f.view(), w, x, p, alpha, &th)?;
        out.check("survey verdict", s.verdict.pass);
        let mut recount = true;
        for a in spot_classes(p, 16, seed) {
            let n = count_t(f.view(), x, alpha, a, p, Sign::Plus, Some(w))?;
            recount &= n == s.t_plus[a as usize];
        }
        out.check("seeded recount of sample classes agrees", recount);
        let lemma_ok = s
            .lemma_bound
            .iter()
            .zip(&s.t_plus)
            .all(|(b, &t)| b.is_none_or(|b| t as f64 >= b));
        out.check(
            "counting-lemma bound holds on every qualifying class",
            lemma_ok,
        );
        out.table = Some(class_rows(
            &s.e_values,
            &s.t_plus,
            &s.t_minus,
            &sets.in_a,
            &sets.in_b,
        ));
        out.plots.push((
            "E",
            s.e_values
                .iter()
                .enumerate()
                .map(|(a, &e)| (a as f64, e))
                .collect(),
        ));
        out.json = json!({
            "command": "survey", "mode": mode, "config": cfg, "seed": seed, "cf": cf, "thresholds": th,
            "verdict": s.verdict, "classes_hit": s.classes_hit,
            "classes_meeting_conditions": s.classes_meeting_conditions,
        });
    }
    Ok(out)
}

pub fn corollary(cfg: &Experiment, epsilon: f64, t: &ThresholdArgs) -> Result<Output, CliError> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 28.0) {
        return config_err(format!("--epsilon must lie in (0, 1/28), got {epsilon}"));
    }
    let x = cfg.xs[0];
    let f = cfg.load()?;
    let cf = cf_for(f.view(), &cfg.window, x, t.cf)?;
    let th = thresholds(t, cf, &cfg.window)?;
    let r = corollary_count(f.view(), &cfg.window, x, epsilon, &th)?;
    let mut out = Output::default();
    out.check("T+ reaches r·x^{4/7−2ε}", r.count_plus as f64 >= r.target);
    out.check("T− reaches r·x^{4/7−2ε}", r.count_minus as f64 >= r.target);
    out.check(
        "T+ is at least the number of classes hit",
        r.count_plus >= r.classes_hit as u64,
    );
    out.json = json!({ "command": "corollary", "form": cfg.form, "window": cfg.window, "cf": cf, "thresholds": th, "report": r });
    Ok(out)
}
