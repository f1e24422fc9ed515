use heegner_lab::arith::{gcd_i64, is_prime, primes_between};
use heegner_lab::diagonals::{delta_normalized_subgroups, expected_count, FiniteGroup};
use heegner_lab::grossgalois::{
    class_set, hecke_equidist_stats, multi_ell_scan, select_ell, simultaneous_reduction, surjectivity_experiment,
    ExperimentConfig,
};
use heegner_lab::heckecosets::verify_orbit_containment;
use heegner_lab::quadratic::{class_number, ImagQuadField};
use heegner_lab::quaternion::{brandt::row_sum_violations, brandt_matrices, expected_mass, mass};
use heegner_lab::ssoracle::{
    cross_check_counts, hecke_operator_multiset, hilbert_class_poly, reduce_and_roots, supersingular_js, tally,
    ModularPolynomials, MAX_CLASSPOLY_DISC,
};
use heegner_lab::{Error, Result};
use serde_json::{json, Value};

use crate::config::{Command, GroupName, RunConfig};

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub summary: Vec<String>,
    pub ok: bool,
    pub result: Value,
    pub table: Table,
}

const DEFAULT_BRANDT_MAX: u64 = 10;
const DEFAULT_COSET_MAX: u64 = 50;
const DEFAULT_EQUIDIST_MAX: u64 = 200;
const DEFAULT_SURJECT_MAX: u64 = 50;
/// TV is summarized over primes above this bound.
const EQUIDIST_TAIL_START: u64 = 50;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn field(cfg: &RunConfig) -> Result<Option<ImagQuadField>> {
    cfg.d.map(ImagQuadField::new).transpose()
}

fn single_ell(cfg: &RunConfig) -> u64 {
    cfg.ell[0]
}

/// `cfg.n`, or `1..=max` filtered by `keep`.
fn index_list(cfg: &RunConfig, default_max: u64, keep: impl Fn(u64) -> bool) -> Vec<u64> {
    if !cfg.n.is_empty() {
        return cfg.n.clone();
    }
    (1..=cfg.n_max.unwrap_or(default_max)).filter(|&n| keep(n)).collect()
}

fn coprime(n: u64, m: i64) -> bool {
    gcd_i64(n as i64, m) == 1
}

fn twists(cfg: &RunConfig) -> Vec<i64> {
    if cfg.twists.is_empty() {
        vec![1]
    } else {
        cfg.twists.clone()
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn dispatch(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Mass => run_mass(cfg),
        Command::Classes => run_classes(cfg),
        Command::Brandt => run_brandt(cfg),
        Command::Cosets => run_cosets(cfg),
        Command::Galois => run_galois(cfg),
        Command::Equidist => run_equidist(cfg),
        Command::Surject => run_surject(cfg),
        Command::SelectEll => run_select_ell(cfg),
        Command::MultiEll => run_multi_ell(cfg),
        Command::Classpoly => run_classpoly(cfg),
        Command::Ss => run_ss(cfg),
        Command::Goursat => run_goursat(cfg),
    }
}

fn run_mass(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let classes = class_set(ell, cfg.level, field(cfg)?.as_ref())?;
    let got = mass(&classes.classes);
    let expected = expected_mass(ell, cfg.level);
    let ok = got == expected;
    Ok(Report {
        summary: vec![format!(
            "mass = {got}, expected {expected}, {}",
            if ok { "OK" } else { "MISMATCH" }
        )],
        ok,
        result: json!({
            "ell": ell,
            "level": cfg.level,
            "classes": classes.len(),
            "weights": classes.weights(),
            "mass": got.to_string(),
            "expected": expected.to_string(),
        }),
        table: Table {
            header: vec!["ell", "level", "classes", "mass", "expected", "ok"],
            rows: vec![vec![
                ell.to_string(),
                cfg.level.to_string(),
                classes.len().to_string(),
                got.to_string(),
                expected.to_string(),
                ok.to_string(),
            ]],
        },
    })
}

fn run_classes(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let classes = class_set(ell, cfg.level, field(cfg)?.as_ref())?;
    let summaries = classes.summaries();
    Ok(Report {
        summary: vec![format!(
            "ell = {ell}, level = {}: {} classes, weights [{}]",
            cfg.level,
            classes.len(),
            join(&classes.weights(), ", ")
        )],
        ok: true,
        result: json!({
            "ell": ell,
            "level": cfg.level,
            "neighbor_prime": classes.neighbor_prime,
            "classes": to_value(&summaries),
        }),
        table: Table {
            header: vec!["index", "weight", "norm", "theta"],
            rows: summaries
                .iter()
                .map(|s| {
                    vec![
                        s.index.to_string(),
                        s.weight.to_string(),
                        s.norm.clone(),
                        join(&s.theta, ";"),
                    ]
                })
                .collect(),
        },
    })
}

fn run_brandt(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let bad = (ell * cfg.level) as i64;
    let ms = index_list(cfg, DEFAULT_BRANDT_MAX, |m| coprime(m, bad));
    let classes = class_set(ell, cfg.level, field(cfg)?.as_ref())?;
    let mut all = brandt_matrices(&classes, &ms)?;
    if cfg.inject_fault {
        if let Some(first) = all.matrices.values_mut().next() {
            first[0][0] += 1;
        }
    }
    let mut problems = Vec::new();
    let mut rows = Vec::new();
    for &m in all.matrices.keys() {
        let b = all.get(m).expect("present");
        for (i, s) in row_sum_violations(&b) {
            problems.push(format!(
                "B({m}) row {i} sums to {s}, expected {}",
                heegner_lab::arith::sigma1(m)
            ));
        }
        if !b.weight_symmetric(&all.weights) {
            problems.push(format!("B({m}) is not weight-symmetric"));
        }
        for (i, row) in b.entries.iter().enumerate() {
            rows.push(vec![
                m.to_string(),
                i.to_string(),
                join(row, ";"),
                row.iter().sum::<u64>().to_string(),
            ]);
        }
    }
    let ok = problems.is_empty();
    let mut summary = vec![format!(
        "B(m) for {} indices up to {}: {}",
        ms.len(),
        ms.iter().max().copied().unwrap_or(0),
        if ok {
            "row sums sigma_1(m), weight-symmetric, OK"
        } else {
            "VIOLATIONS"
        }
    )];
    summary.extend(problems.iter().cloned());
    Ok(Report {
        summary,
        ok,
        result: json!({ "brandt": to_value(&all), "violations": problems }),
        table: Table {
            header: vec!["m", "row", "entries", "row_sum"],
            rows,
        },
    })
}

fn run_cosets(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let f = field(cfg)?.expect("validated");
    let bad = ell as i64 * cfg.level as i64 * f.disc();
    let ns = index_list(cfg, DEFAULT_COSET_MAX, |n| coprime(n, bad));
    let reports = ns
        .iter()
        .map(|&n| verify_orbit_containment(n, &f, ell, Some(cfg.level)))
        .collect::<Result<Vec<_>>>()?;
    let failing: Vec<u64> = reports
        .iter()
        .filter(|r| !(r.distinct && r.contained && r.d_matches))
        .map(|r| r.n)
        .collect();
    let ok = failing.is_empty();
    let summary = if ok {
        vec![format!(
            "{} conductors checked: cosets distinct, contained in the Hecke orbit, d(n) matches, OK",
            ns.len()
        )]
    } else {
        vec![format!("containment fails for n = {}", join(&failing, ", "))]
    };
    Ok(Report {
        summary,
        ok,
        result: json!({ "ell": ell, "D": f.disc(), "reports": to_value(&reports) }),
        table: Table {
            header: vec!["n", "d", "distinct", "contained", "d_matches"],
            rows: reports
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        format!("{}/{}", r.d_num, r.d_den),
                        r.distinct.to_string(),
                        r.contained.to_string(),
                        r.d_matches.to_string(),
                    ]
                })
                .collect(),
        },
    })
}

fn run_galois(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let f = field(cfg)?.expect("validated");
    let ns = if cfg.n.is_empty() { vec![1] } else { cfg.n.clone() };
    let ts = twists(cfg);
    let classes = class_set(ell, cfg.level, Some(&f))?;
    let mut summary = Vec::new();
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for &n in &ns {
        let order = f.order(n)?;
        let t = simultaneous_reduction(&classes, &order, &ts)?;
        let mut line = format!(
            "n = {n}: h = {}, orbit of {} Gross points",
            t.class_number, t.orbit_size
        );
        if order.disc().abs() <= MAX_CLASSPOLY_DISC {
            let c = cross_check_counts(&classes, &f, n)?;
            ok &= c.consistent();
            line.push_str(if c.consistent() {
                ", deg H and supersingular roots agree"
            } else {
                ", COUNT MISMATCH"
            });
            checks.push(to_value(&c));
        }
        summary.push(line);
        for (nu, row) in t.entries.iter().enumerate() {
            rows.push(vec![n.to_string(), t.forms[nu].to_string(), join(row, ";")]);
        }
        tables.push(to_value(&t));
    }
    Ok(Report {
        summary,
        ok,
        result: json!({ "tables": tables, "cross_checks": checks }),
        table: Table {
            header: vec!["n", "form", "classes"],
            rows,
        },
    })
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

fn equidist_rows(rep: &heegner_lab::grossgalois::EquidistReport) -> Vec<Vec<String>> {
    rep.rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format!("{:.12}", r.tv),
                opt(&r.d.map(|[a, b]| format!("{a}/{b}"))),
                format!("{}/{}", r.c[0], r.c[1]),
                opt(&r.in_regime),
                opt(&r.coverage.map(|c| format!("{c:.12}"))),
                opt(&r.orbit_size),
                opt(&r.target_size),
            ]
        })
        .collect()
}

const EQUIDIST_HEADER: [&str; 8] = [
    "n",
    "tv",
    "d",
    "c",
    "in_regime",
    "coverage",
    "orbit_size",
    "target_size",
];

fn run_equidist(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let bad = (ell * cfg.level) as i64;
    let ns = if cfg.n.is_empty() {
        primes_between(2, cfg.n_max.unwrap_or(DEFAULT_EQUIDIST_MAX))
            .into_iter()
            .filter(|&p| coprime(p, bad))
            .collect()
    } else {
        cfg.n.clone()
    };
    let classes = class_set(ell, cfg.level, field(cfg)?.as_ref())?;
    let mut rep = hecke_equidist_stats(&classes, 0, &ns)?;
    rep.disc_l = cfg.d;
    let hi = cfg.n_max.unwrap_or_else(|| ns.iter().copied().max().unwrap_or(0));
    let tail = rep.max_tv_over_primes(EQUIDIST_TAIL_START, hi);
    let summary = vec![match tail {
        Some(tv) => format!("max TV over primes in ({EQUIDIST_TAIL_START}, {hi}]: {tv:.6}"),
        None => format!("no primes above {EQUIDIST_TAIL_START} in the run"),
    }];
    Ok(Report {
        summary,
        ok: true,
        table: Table {
            header: EQUIDIST_HEADER.to_vec(),
            rows: equidist_rows(&rep),
        },
        result: to_value(&rep),
    })
}

fn run_surject(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let f = field(cfg)?.expect("validated");
    let bad = ell as i64 * cfg.level as i64 * f.disc();
    let ns = index_list(cfg, DEFAULT_SURJECT_MAX, |n| is_prime(n) && coprime(n, bad));
    let classes = class_set(ell, cfg.level, Some(&f))?;
    let rep = surjectivity_experiment(&classes, &f, &twists(cfg), &ns)?;
    let summary = vec![
        format!("k = {} blocks, target size {}", rep.k, classes.len().pow(rep.k as u32)),
        match rep.smallest_full_coverage() {
            Some(n) => format!("smallest n with full coverage: {n}"),
            None => "no n in the run reaches full coverage".to_string(),
        },
    ];
    Ok(Report {
        summary,
        ok: true,
        table: Table {
            header: EQUIDIST_HEADER.to_vec(),
            rows: equidist_rows(&rep),
        },
        result: to_value(&rep),
    })
}

fn experiment_config(cfg: &RunConfig) -> ExperimentConfig {
    ExperimentConfig {
        t1: cfg.t1,
        t2: cfg.t2,
        dim_a: cfg.dim_a,
        r: cfg.r.unwrap_or(1),
    }
}

fn run_select_ell(cfg: &RunConfig) -> Result<Report> {
    let f = field(cfg)?.expect("validated");
    let sel = select_ell(&experiment_config(cfg), &f, cfg.level)?;
    Ok(Report {
        summary: vec![format!(
            "ell = {}: {} classes > bound {}",
            sel.ell, sel.classes, sel.bound
        )],
        ok: true,
        table: Table {
            header: vec!["ell", "classes", "class_upper_bound"],
            rows: sel
                .candidates
                .iter()
                .map(|c| vec![c.ell.to_string(), opt(&c.classes), c.class_upper_bound.to_string()])
                .collect(),
        },
        result: to_value(&sel),
    })
}

fn run_multi_ell(cfg: &RunConfig) -> Result<Report> {
    let f = field(cfg)?.expect("validated");
    let ns = if cfg.n.is_empty() { vec![1] } else { cfg.n.clone() };
    let rep = multi_ell_scan(&cfg.ell, &f, cfg.level, &twists(cfg), &ns, &experiment_config(cfg))?;
    let mut summary: Vec<String> = rep
        .rows
        .iter()
        .map(|r| {
            format!(
                "ell = {}: s = {}, t1/s = {}/{}",
                r.ell, r.s, r.bound_ratio[0], r.bound_ratio[1]
            )
        })
        .collect();
    summary.push(format!(
        "ratios strictly decreasing: {}",
        if rep.ratios_strictly_decreasing { "yes" } else { "no" }
    ));
    let mut rows = Vec::new();
    for r in &rep.rows {
        for p in &r.per_n {
            rows.push(vec![
                r.ell.to_string(),
                r.s.to_string(),
                format!("{}/{}", r.bound_ratio[0], r.bound_ratio[1]),
                p.n.to_string(),
                p.rows.to_string(),
                opt(&p.distinct_fraction.map(|x| format!("{x:.12}"))),
            ]);
        }
    }
    Ok(Report {
        summary,
        ok: true,
        table: Table {
            header: vec!["ell", "s", "bound_ratio", "n", "rows", "distinct_fraction"],
            rows,
        },
        result: to_value(&rep),
    })
}

fn run_classpoly(cfg: &RunConfig) -> Result<Report> {
    let d = cfg.d.expect("validated");
    let h = hilbert_class_poly(d)?;
    let ok = h.degree() == class_number(d);
    let mut summary = vec![
        format!("H_{d}: degree {}, h({d}) = {}", h.degree(), class_number(d)),
        h.to_line(),
    ];
    let mut roots_json = Value::Null;
    if let Some(&ell) = cfg.ell.first() {
        let roots = reduce_and_roots(&h, ell)?;
        summary.push(format!("roots mod {ell}: {}", join(&roots, " ")));
        roots_json = json!({ "ell": ell, "roots": roots.iter().map(ToString::to_string).collect::<Vec<_>>() });
    }
    Ok(Report {
        summary,
        ok,
        table: Table {
            header: vec!["D", "degree", "coefficients"],
            rows: vec![vec![d.to_string(), h.degree().to_string(), join(&h.coeffs, ";")]],
        },
        result: json!({ "poly": to_value(&h), "reduction": roots_json }),
    })
}

fn run_ss(cfg: &RunConfig) -> Result<Report> {
    let ell = single_ell(cfg);
    let set = supersingular_js(ell)?;
    let expected = heegner_lab::arith::rat(ell as i64 - 1, 24);
    let ok = set.mass() == expected;
    let mut summary = vec![format!(
        "ell = {ell}: {} supersingular j-invariants, mass {} (expected {expected})",
        set.len(),
        set.mass()
    )];
    let mut walks = Vec::new();
    if !cfg.n.is_empty() {
        let polys = ModularPolynomials::load(cfg.modpoly_dir.as_deref())?;
        let j0 = set.js[0];
        for &n in &cfg.n {
            let t = tally(&hecke_operator_multiset(&polys, j0, n, ell)?);
            let parts: Vec<String> = t.iter().map(|(j, c)| format!("{j}:{c}")).collect();
            summary.push(format!("T_{n}({j0}) = {}", parts.join(" ")));
            walks.push(json!({
                "n": n,
                "start": j0.to_string(),
                "targets": t.iter().map(|(j, c)| json!([j.to_string(), c])).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(Report {
        summary,
        ok,
        table: Table {
            header: vec!["j", "weight"],
            rows: set
                .js
                .iter()
                .zip(&set.weights)
                .map(|(j, w)| vec![j.to_string(), w.to_string()])
                .collect(),
        },
        result: json!({
            "ell": ell,
            "js": set.js.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "weights": set.weights,
            "mass": set.mass().to_string(),
            "walks": walks,
        }),
    })
}

fn load_group(cfg: &RunConfig) -> Result<FiniteGroup> {
    if let Some(path) = &cfg.group_file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map_or("G".into(), |s| s.to_string_lossy().into_owned());
        return FiniteGroup::from_table_text(&name, &text);
    }
    Ok(match cfg.group {
        GroupName::A5 => FiniteGroup::a5(),
        GroupName::Psl27 => FiniteGroup::psl2_7(),
    })
}

fn run_goursat(cfg: &RunConfig) -> Result<Report> {
    let g = load_group(cfg)?;
    let r = cfg.r.unwrap_or(2) as usize;
    let subs = delta_normalized_subgroups(&g, r)?;
    let expected = expected_count(r);
    let certified = subs.iter().all(|s| s.certificate.is_some());
    let ok = subs.len() as u64 == expected && certified;
    let cert = |s: &heegner_lab::diagonals::SubgroupDescriptor| match &s.certificate {
        Some(blocks) => blocks
            .iter()
            .map(|b| format!("{{{}}}", join(b, ",")))
            .collect::<Vec<_>>()
            .join(" "),
        None => "none".into(),
    };
    Ok(Report {
        summary: vec![format!(
            "{}, r = {r}: {} subgroups (expected {expected}), {}",
            g.name,
            subs.len(),
            if certified {
                "all products of diagonals"
            } else {
                "SOME NOT PRODUCTS OF DIAGONALS"
            }
        )],
        ok,
        table: Table {
            header: vec!["order", "certificate"],
            rows: subs.iter().map(|s| vec![s.order.to_string(), cert(s)]).collect(),
        },
        result: json!({
            "group": g.name,
            "group_order": g.order(),
            "r": r,
            "expected": expected,
            "subgroups": to_value(&subs),
        }),
    })
}
