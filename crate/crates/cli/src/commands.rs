use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_bigint::{BigInt, BigUint};
use serde::Serialize;
use serde_json::{json, Value};

use slp_core::circuit::analyze;
use slp_core::count::{count_ext_monomials, count_monomials_exact, exist_ext_monomial, ml_countmon_decide, monml};
use slp_core::ident::{acit, check_multilinear, mlzmc_decide};
use slp_core::poly::{eval, expand_with, ExpandOptions, PolynomialJson};
use slp_core::reductions::{
    ccne3sat_to_countextmon, cexists3sat_to_countmon, countextmon_to_countmon, determinant_circuit, has_exact_cover,
    leibniz_determinant, model_table, normalize_counting, perm_to_mlcountmon, perm_to_zmc, permanent, x3c_to_zmc,
    CountExtInstance, ExactCoverInstance, SignMatrix, ThreeCnf,
};
use slp_core::selftest::{run_all, run_criterion, Level, CRITERIA};
use slp_core::zmc::{zmc_exact, zmc_monotone, zmc_randomized};
use slp_core::{parse_circuit, Budget, Circuit, Method, Monomial, PrimeSampler, Var};

use crate::{Cli, Command, Failure, GlobalOpts, LevelArg, ModeArg, OracleKind, ReduceArgs, ReduceKind};

/// Seed used by `selftest` when none is given, so that runs are comparable.
pub const SELFTEST_SEED: u64 = 0x5EED_2024;

/// Default trial count for randomized tests other than `zmc`, whose default
/// comes from the per-trial bound.
const DEFAULT_TRIALS: u64 = 20;
/// Failure probability targeted by the default `zmc` trial count.
const ZMC_DELTA: f64 = 1e-6;

pub struct Done {
    pub command: String,
    pub inputs: Vec<String>,
    pub result: Value,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub budget: Budget,
    pub text: String,
    /// False only for a failing self-test.
    pub passed: bool,
}

struct Ctx<'a> {
    opts: &'a GlobalOpts,
    inputs: Vec<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    budget: Budget,
}

impl Ctx<'_> {
    fn read(&mut self, path: &Path) -> anyhow::Result<String> {
        let text = if path == Path::new("-") {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .context("reading standard input")?;
            s
        } else {
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        };
        self.inputs.push(text.clone());
        Ok(text)
    }

    fn circuit(&mut self, path: &Path) -> Result<Circuit, Failure> {
        let text = self.read(path)?;
        parse_circuit(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn instance<T>(&mut self, path: Option<&PathBuf>) -> Result<T, Failure>
    where
        T: std::str::FromStr<Err = slp_core::Error>,
    {
        let path = path.ok_or_else(|| Failure::Usage("an input file is required".into()))?;
        let text = self.read(path)?;
        text.parse()
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn sampler(&mut self) -> Result<PrimeSampler, Failure> {
        let seed = match (self.opts.seed, self.opts.strict) {
            (Some(s), _) => s,
            (None, true) => return Err(Failure::Usage("--strict requires --seed for randomized runs".into())),
            (None, false) => {
                let s = rand::random::<u64>();
                eprintln!("seed: {s} (replay with --seed {s})");
                s
            }
        };
        self.seed = Some(seed);
        Ok(PrimeSampler::new(seed).with_c(self.opts.c_const))
    }

    /// The method selected by `--mode`; `monotone` is rejected here.
    fn method(&mut self, default_trials: u64) -> Result<Method, Failure> {
        match self.opts.mode {
            ModeArg::Exact => Ok(Method::Exact),
            ModeArg::Monotone => Err(Failure::Usage("--mode monotone applies to zmc only".into())),
            ModeArg::Randomized => {
                let sampler = self.sampler()?;
                let trials = self.opts.trials.unwrap_or(default_trials);
                if trials == 0 {
                    return Err(Failure::Usage("--trials must be positive".into()));
                }
                self.trials = Some(trials);
                Ok(Method::Randomized { trials, sampler })
            }
        }
    }

    fn exact_only(&self, what: &str) -> Result<(), Failure> {
        if self.opts.mode != ModeArg::Exact {
            return Err(Failure::Usage(format!("{what} has only an exact mode")));
        }
        Ok(())
    }
}

fn label<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn to_json<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn monomial(s: &str) -> Result<Monomial, Failure> {
    Ok(Monomial::parse(s)?)
}

fn biguint(s: &str, what: &str) -> Result<BigUint, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{what} must be a nonnegative integer, got {s:?}")))
}

fn bigint(s: &str, what: &str) -> Result<BigInt, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{what} must be an integer, got {s:?}")))
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    v.as_ref().ok_or_else(|| Failure::Usage(format!("{flag} is required")))
}

pub fn run(cli: &Cli) -> Result<Done, Failure> {
    let opts = &cli.opts;
    let mut ctx = Ctx {
        opts,
        inputs: Vec::new(),
        seed: None,
        trials: None,
        budget: Budget::new(opts.budget_terms, opts.budget_degree).with_work(opts.budget_work),
    };
    let mut passed = true;
    let (name, result, text) = match &cli.command {
        Command::Parse { file } => {
            let c = ctx.circuit(file)?;
            let net = c.to_netlist();
            ("parse", json!({ "size": c.size(), "netlist": net }), net)
        }
        Command::Analyze { file } => {
            let c = ctx.circuit(file)?;
            let stats = to_json(&analyze(&c));
            let text = serde_json::to_string_pretty(&stats).expect("serializable") + "\n";
            ("analyze", stats, text)
        }
        Command::Expand { file, modulus } => {
            let c = ctx.circuit(file)?;
            let (p, stats) = expand_with(
                &c,
                &ExpandOptions {
                    modulus: *modulus,
                    cap: None,
                    budget: ctx.budget.clone(),
                },
            )?;
            let result = json!({
                "polynomial": PolynomialJson::from(&p),
                "monomials": p.count_monomials(),
                "peak_terms": stats.peak_terms,
            });
            ("expand", result, format!("{p}\n"))
        }
        Command::Eval { file, at, modulus } => {
            let c = ctx.circuit(file)?;
            let point = assignments(at)?;
            let value = match modulus {
                Some(p) => {
                    if *p < 2 {
                        return Err(Failure::Usage("--modulus must be at least 2".into()));
                    }
                    let pp = BigInt::from(*p);
                    let residues: HashMap<Var, u64> = point
                        .iter()
                        .map(|(v, x)| {
                            let r = ((x % &pp) + &pp) % &pp;
                            (v.clone(), u64::try_from(r).expect("residue fits"))
                        })
                        .collect();
                    BigInt::from(eval(&c, &residues, *p)?)
                }
                None => {
                    if let Some(v) = c.vars().iter().find(|v| !point.contains_key(*v)) {
                        return Err(slp_core::Error::UnboundVariable(v.to_string()).into());
                    }
                    let p = slp_core::poly::expand(&c, &ctx.budget)?;
                    p.substitute(&point).coefficient(&Monomial::one())
                }
            };
            let result = json!({ "value": value.to_string(), "modulus": modulus });
            ("eval", result, format!("{value}\n"))
        }
        Command::Acit { file } => {
            let c = ctx.circuit(file)?;
            let method = ctx.method(DEFAULT_TRIALS)?;
            let v = acit(&c, &method, &ctx.budget)?;
            let text = format!("{}\n", label(&v.answer));
            ("acit", to_json(&v), text)
        }
        Command::Checkml { file } => {
            let c = ctx.circuit(file)?;
            let method = ctx.method(DEFAULT_TRIALS)?;
            let ml = check_multilinear(&c, &method, &ctx.budget)?;
            let text = if ml { "multilinear\n" } else { "not-multilinear\n" };
            (
                "checkml",
                json!({ "multilinear": ml, "mode": method.mode() }),
                text.to_string(),
            )
        }
        Command::Zmc { file, monomial: m } => {
            let c = ctx.circuit(file)?;
            let m = monomial(m)?;
            let v = match opts.mode {
                ModeArg::Exact => zmc_exact(&c, &m, &ctx.budget)?,
                ModeArg::Monotone => zmc_monotone(&c, &m, &ctx.budget)?,
                ModeArg::Randomized => {
                    let sampler = ctx.sampler()?;
                    let trials = opts
                        .trials
                        .unwrap_or_else(|| sampler.trials_for_confidence(c.size(), ZMC_DELTA));
                    ctx.trials = Some(trials);
                    zmc_randomized(&c, &m, trials, &sampler, &ctx.budget)?
                }
            };
            let mut text = label(&v.answer);
            if let Some(k) = &v.coefficient {
                let _ = write!(text, " (coefficient {k})");
            }
            text.push('\n');
            ("zmc", to_json(&v), text)
        }
        Command::Mlzmc { file, monomial: m } => {
            let c = ctx.circuit(file)?;
            let m = monomial(m)?;
            let method = ctx.method(DEFAULT_TRIALS)?;
            let a = mlzmc_decide(&c, &m, &method, &ctx.budget)?;
            let text = format!("{}\n", label(&a));
            ("mlzmc", json!({ "answer": a, "mode": method.mode() }), text)
        }
        Command::Countmon { file, threshold } => {
            ctx.exact_only("countmon")?;
            let c = ctx.circuit(file)?;
            let d = biguint(threshold, "--threshold")?;
            let count = count_monomials_exact(&c, &ctx.budget)?;
            let at_least = BigUint::from(count) >= d;
            let result = json!({ "count": count, "threshold": d.to_string(), "at_least": at_least });
            ("countmon", result, format!("{at_least} (count {count})\n"))
        }
        Command::Extmon {
            file,
            monomial: m,
            threshold,
        } => {
            let c = ctx.circuit(file)?;
            let m = monomial(m)?;
            match threshold {
                Some(t) => {
                    ctx.exact_only("extmon with --threshold")?;
                    let d = biguint(t, "--threshold")?;
                    let count = count_ext_monomials(&c, &m, &ctx.budget)?;
                    let at_least = BigUint::from(count) >= d;
                    let result = json!({ "count": count, "threshold": d.to_string(), "at_least": at_least });
                    ("extmon", result, format!("{at_least} (count {count})\n"))
                }
                None => {
                    let method = ctx.method(DEFAULT_TRIALS)?;
                    let v = exist_ext_monomial(&c, &m, &method, &ctx.budget)?;
                    let text = format!("{}\n", if v.exists { "exists" } else { "none" });
                    ("extmon", to_json(&v), text)
                }
            }
        }
        Command::Monml { file } => {
            let c = ctx.circuit(file)?;
            let method = ctx.method(DEFAULT_TRIALS)?;
            let v = monml(&c, &method, &ctx.budget)?;
            let text = format!("{}\n", if v.exists { "exists" } else { "none" });
            ("monml", to_json(&v), text)
        }
        Command::Mlcountmon { file, threshold } => {
            let c = ctx.circuit(file)?;
            let d = biguint(threshold, "--threshold")?;
            let method = ctx.method(DEFAULT_TRIALS)?;
            let a = ml_countmon_decide(&c, &d, &method, &ctx.budget)?;
            let text = format!("{}\n", label(&a));
            (
                "mlcountmon",
                json!({ "answer": a, "threshold": d.to_string(), "mode": method.mode() }),
                text,
            )
        }
        Command::Reduce(args) => {
            let (result, text) = reduce(&mut ctx, args)?;
            ("reduce", result, text)
        }
        Command::Oracle { kind, file, n } => {
            let (result, text) = oracle(&mut ctx, *kind, file.as_ref(), *n)?;
            ("oracle", result, text)
        }
        Command::Selftest { level, criterion } => {
            let level = match level {
                LevelArg::Small => Level::Small,
                LevelArg::Full => Level::Full,
            };
            let seed = opts.seed.unwrap_or(SELFTEST_SEED);
            ctx.seed = Some(seed);
            let reports = match criterion {
                Some(id) => {
                    if !CRITERIA.iter().any(|c| c.0 == *id) {
                        return Err(Failure::Usage(format!("no criterion {id}")));
                    }
                    vec![run_criterion(*id, level, seed)]
                }
                None => run_all(level, seed),
            };
            let mut text = String::new();
            for r in &reports {
                let _ = writeln!(text, "{}", r.line());
                for n in &r.notes {
                    let _ = writeln!(text, "    {n}");
                }
            }
            passed = reports.iter().all(|r| r.passed);
            let result = json!({ "passed": passed, "criteria": reports });
            ("selftest", result, text)
        }
    };
    Ok(Done {
        command: name.to_string(),
        inputs: ctx.inputs,
        result,
        seed: ctx.seed,
        trials: ctx.trials,
        budget: ctx.budget,
        text,
        passed,
    })
}

fn assignments(at: &[String]) -> Result<HashMap<Var, BigInt>, Failure> {
    let mut point = HashMap::new();
    for a in at {
        let (name, value) = a
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected NAME=VALUE, got {a:?}")))?;
        let v = bigint(value, name)?;
        if point.insert(Var::new(name.trim()), v).is_some() {
            return Err(Failure::Usage(format!("{} assigned twice", name.trim())));
        }
    }
    Ok(point)
}

/// Builds the gadget; returns the report fields and the text output, which is
/// the netlist preceded by `#` lines carrying the query parameters.
fn reduce(ctx: &mut Ctx<'_>, args: &ReduceArgs) -> Result<(Value, String), Failure> {
    let mut params = serde_json::Map::new();
    let circuit = match args.kind {
        ReduceKind::PerZmc => {
            let a: SignMatrix = ctx.instance(args.file.as_ref())?;
            let d = bigint(required(&args.d, "--d")?, "--d")?;
            let (c, m) = perm_to_zmc(&a, &d)?;
            params.insert("monomial".into(), json!(m.to_string()));
            c
        }
        ReduceKind::X3cZmc => {
            let inst: ExactCoverInstance = ctx.instance(args.file.as_ref())?;
            let (c, m) = x3c_to_zmc(&inst)?;
            params.insert("monomial".into(), json!(m.to_string()));
            c
        }
        ReduceKind::CcneCem => {
            let f: ThreeCnf = ctx.instance(args.file.as_ref())?;
            let k = biguint(required(&args.k, "--k")?, "--k")?;
            let ell = biguint(required(&args.ell, "--ell")?, "--ell")?;
            let (nf, k2, l2) = normalize_counting(&f, &k, &ell)?;
            let inst = ccne3sat_to_countextmon(&nf.cnf, &k2, &l2)?;
            params.insert("monomial".into(), json!(inst.base.to_string()));
            params.insert("threshold".into(), json!(inst.k.to_string()));
            params.insert("ell".into(), json!(l2.to_string()));
            params.insert("n".into(), json!(nf.cnf.nx));
            params.insert("c".into(), json!(nf.cnf.clauses.len()));
            inst.circuit
        }
        ReduceKind::CemCm => {
            let path = required(&args.file, "an input netlist")?;
            let circuit = ctx.circuit(path)?;
            let base = monomial(required(&args.monomial, "--monomial")?)?;
            let k = biguint(required(&args.k, "--k")?, "--k")?;
            let ell = biguint(required(&args.ell, "--ell")?, "--ell")?;
            let n = *required(&args.n, "--n")?;
            let c = *required(&args.c, "--c")?;
            let inst = CountExtInstance { circuit, k, base };
            let (out, t) = countextmon_to_countmon(&inst, &ell, n, c)?;
            params.insert("threshold".into(), json!(t.to_string()));
            out
        }
        ReduceKind::CexistsCm => {
            let f: ThreeCnf = ctx.instance(args.file.as_ref())?;
            let k = biguint(required(&args.k, "--k")?, "--k")?;
            let (nf, k2, _) = normalize_counting(&f, &k, &BigUint::default())?;
            let (out, t) = cexists3sat_to_countmon(&nf.cnf, &k2)?;
            params.insert("threshold".into(), json!(t.to_string()));
            out
        }
        ReduceKind::PerMlcm => {
            let a: SignMatrix = ctx.instance(args.file.as_ref())?;
            perm_to_mlcountmon(&a)?
        }
        ReduceKind::Det => determinant_circuit(*required(&args.n, "--n")?)?,
    };
    let net = circuit.to_netlist();
    let mut header = String::new();
    for (k, v) in &params {
        let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
        let _ = writeln!(header, "# {k}: {v}");
    }
    let mut result = json!({
        "kind": label_kind(args.kind),
        "size": circuit.size(),
        "params": Value::Object(params),
    });
    let text = match &args.output {
        Some(path) => {
            std::fs::write(path, format!("{header}{net}")).with_context(|| format!("writing {}", path.display()))?;
            result["output"] = json!(path.display().to_string());
            format!("{header}# size: {}\n# written to {}\n", circuit.size(), path.display())
        }
        None => {
            result["netlist"] = json!(net);
            format!("{header}{net}")
        }
    };
    Ok((result, text))
}

fn label_kind(k: ReduceKind) -> String {
    use clap::ValueEnum;
    k.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn oracle(
    ctx: &mut Ctx<'_>,
    kind: OracleKind,
    file: Option<&PathBuf>,
    n: Option<usize>,
) -> Result<(Value, String), Failure> {
    Ok(match kind {
        OracleKind::Permanent => {
            let a: SignMatrix = ctx.instance(file)?;
            let p = permanent(&a)?;
            (json!({ "permanent": p.to_string() }), format!("{p}\n"))
        }
        OracleKind::Models => {
            let f: ThreeCnf = ctx.instance(file)?;
            let table = model_table(&f)?;
            let satisfiable = table.iter().filter(|&&m| m > 0).count();
            let mut text = String::new();
            for (a, m) in table.iter().enumerate() {
                let bits: String = (0..f.nx).map(|i| if a >> i & 1 == 1 { '1' } else { '0' }).collect();
                let _ = writeln!(text, "{bits} {m}");
            }
            let _ = writeln!(text, "# satisfiable assignments: {satisfiable}");
            (json!({ "models": table, "satisfiable": satisfiable }), text)
        }
        OracleKind::ExactCover => {
            let inst: ExactCoverInstance = ctx.instance(file)?;
            let found = has_exact_cover(&inst);
            (json!({ "exact_cover": found }), format!("{found}\n"))
        }
        OracleKind::Determinant => {
            let n = n.ok_or_else(|| Failure::Usage("--n is required".into()))?;
            if n == 0 {
                return Err(Failure::Usage("--n must be positive".into()));
            }
            let p = leibniz_determinant(n)?;
            (json!({ "polynomial": PolynomialJson::from(&p) }), format!("{p}\n"))
        }
    })
}
