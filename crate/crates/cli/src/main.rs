use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ecrnet::bench::{average_row, run_instance, BenchRow, CSV_HEADER};
use ecrnet::ecr::{relax_all, CutFile, LinearCut, TaggedCut};
use ecrnet::instances::{gen_fc, gen_tr, read_manifest, Instance, ManifestRow, TrMode};
use ecrnet::lp::solve_default;
use ecrnet::model::{BilinearSet, Point, Program, SetLp};
use ecrnet::network::Sign;
use ecrnet::separation::{SeparationConfig, Separator};
use ecrnet::verify::validity_check;
use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ecrnet", version, about = "EC&R cutting planes for bilinear network-flow sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark instance
    Gen(GenArgs),
    /// Generate EC&R cuts for an instance or a bare set
    Cuts(CutsArgs),
    /// Check every cut of a cut file against the exact per-disjunct oracle
    Verify(VerifyArgs),
    /// Run the benchmark protocol over a manifest and print CSV
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Fc,
    Tr,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// total node count (split evenly into supply and demand nodes)
    #[arg(long)]
    nodes: usize,
    /// ε/u on fixed-charge arcs (fc)
    #[arg(long, default_value_t = 0.2)]
    frac: f64,
    /// number of services (tr)
    #[arg(long, default_value_t = 6)]
    services: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    top_classes: Option<usize>,
    #[arg(long)]
    max_aggregations: Option<usize>,
    #[arg(long)]
    improvement_stop: Option<f64>,
    #[arg(long)]
    violation_tol: Option<f64>,
    #[arg(long)]
    forest_budget: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    verify_cuts: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<SeparationConfig> {
        let mut c = match &self.config {
            Some(p) => SeparationConfig::parse_kv(&read(p)?).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?,
            None => SeparationConfig::default(),
        };
        c.top_classes = self.top_classes.unwrap_or(c.top_classes);
        c.max_aggregations = self.max_aggregations.unwrap_or(c.max_aggregations);
        c.improvement_stop = self.improvement_stop.unwrap_or(c.improvement_stop);
        c.violation_tol = self.violation_tol.unwrap_or(c.violation_tol);
        c.forest_budget = self.forest_budget.or(c.forest_budget);
        c.max_rounds = self.max_rounds.unwrap_or(c.max_rounds);
        c.verify_cuts |= self.verify_cuts;
        c.validate().map_err(anyhow::Error::msg)?;
        Ok(c)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Pos,
    Neg,
}

#[derive(Args)]
struct CutsArgs {
    /// instance JSON (fc/tr) or bare set JSON
    #[arg(long)]
    instance: PathBuf,
    /// restrict to the set over these program y indices, e.g. `0` or `2,5`
    #[arg(long, value_delimiter = ',')]
    ys: Option<Vec<usize>>,
    /// restrict to class z_k
    #[arg(long)]
    class: Option<u32>,
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// emit every relaxation of every aggregation instead of separating a point
    #[arg(long)]
    all: bool,
    /// point to separate (default: McCormick optimum of the instance)
    #[arg(long)]
    point: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    cuts: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// CSV with header family,nodes,param,seed
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// instances run concurrently
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    cfg: ConfigArgs,
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// An input file: a generated instance or a bare set.
enum Input {
    Instance(Instance),
    Set(BilinearSet),
}

impl Input {
    fn load(p: &Path) -> Result<Input> {
        let text = read(p)?;
        let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        match v.get("family").and_then(|f| f.as_str()) {
            Some("fc") | Some("tr") => Ok(Input::Instance(Instance::from_json(&text)?)),
            _ => Ok(Input::Set(BilinearSet::from_json(&text)?)),
        }
    }

    fn program(&self) -> Option<Program> {
        match self {
            Input::Instance(i) => Some(i.program()),
            Input::Set(_) => None,
        }
    }

    fn set_for(&self, ys: &[usize]) -> Result<BilinearSet> {
        match self {
            Input::Instance(i) => {
                let p = i.program();
                if ys.iter().any(|&j| j >= p.ny) || ys.is_empty() {
                    bail!("y indices {ys:?} out of range (ny = {})", p.ny);
                }
                let mut sorted = ys.to_vec();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != ys.len() {
                    bail!("repeated y index in {ys:?}");
                }
                Ok(p.set(ys))
            }
            Input::Set(s) => {
                if ys != s.y_ids() {
                    bail!("bare set has y indices {:?}", s.y_ids());
                }
                Ok(s.clone())
            }
        }
    }

    fn default_sets(&self) -> Vec<BilinearSet> {
        match self {
            Input::Instance(Instance::Fc(i)) => ecrnet::instances::fc_relaxations(i),
            Input::Instance(Instance::Tr(i)) => {
                let mut v = ecrnet::instances::tr_relaxations(i, TrMode::Single);
                v.extend(ecrnet::instances::tr_relaxations(i, TrMode::ConflictPair));
                v
            }
            Input::Set(s) => vec![s.clone()],
        }
    }
}

fn mccormick_point(p: &Program) -> Result<Point> {
    let lp = p.mccormick();
    let sol = solve_default(&lp.lp)?;
    if !sol.is_optimal() {
        bail!("McCormick relaxation is {:?}", sol.status);
    }
    Ok(lp.point(&sol))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let inst = match a.family {
        FamilyArg::Fc => Instance::Fc(gen_fc(a.seed, a.nodes, a.frac)?),
        FamilyArg::Tr => Instance::Tr(gen_tr(a.seed, a.nodes, a.services)?),
    };
    emit(&a.out, &inst.to_json())
}

fn cmd_cuts(a: &CutsArgs) -> Result<()> {
    let cfg = a.cfg.load()?;
    let input = Input::load(&a.instance)?;
    let sets = match &a.ys {
        Some(ys) => vec![input.set_for(ys)?],
        None => input.default_sets(),
    };
    let signs: Vec<Sign> = match a.sign {
        Some(SignArg::Pos) => vec![Sign::Pos],
        Some(SignArg::Neg) => vec![Sign::Neg],
        None => vec![Sign::Pos, Sign::Neg],
    };
    let point = if a.all {
        None
    } else {
        Some(match (&a.point, input.program()) {
            (Some(p), _) => Point::from_json(&read(p)?)?,
            (None, Some(prog)) => mccormick_point(&prog)?,
            (None, None) => bail!("a bare set needs --point (or --all)"),
        })
    };
    let mut out = CutFile { cuts: Vec::new() };
    for s in &sets {
        let mut sep = Separator::new();
        let mut seen = HashSet::new();
        let mut keep = |c: LinearCut, out: &mut CutFile| {
            let class = c.provenance.as_ref().map(|p| (p.assignment.class_k, p.assignment.sign));
            let wanted = class.map_or(true, |(k, sg)| a.class.map_or(true, |c| c == k) && signs.contains(&sg));
            if wanted && seen.insert(c.key()) {
                out.cuts.push(TaggedCut { ys: s.y_ids().to_vec(), cut: c });
            }
        };
        match &point {
            None => {
                let classes: Vec<u32> = match a.class {
                    Some(k) if s.triple(k).is_some() => vec![k],
                    Some(_) => vec![],
                    None => s.triples().iter().map(|t| t.k).collect(),
                };
                let priority: Vec<_> = s.triples().iter().map(|t| t.arc).collect();
                for k in classes {
                    for &sg in &signs {
                        for agg in sep.class_aggregations(s, k, sg, &priority, &cfg).to_vec() {
                            for c in relax_all(&agg, s)? {
                                keep(c, &mut out);
                            }
                        }
                    }
                }
            }
            Some(p) => {
                let local = if p.y.len() == s.m() && input.program().is_none() { p.clone() } else { SetLp::local_point(p, s) };
                for c in sep.separate(&local, s, &cfg) {
                    keep(c, &mut out);
                }
            }
        }
    }
    for (n, c) in out.cuts.iter().enumerate() {
        eprintln!("cut {n} on y{:?}: {}", c.ys, c.cut.pretty());
    }
    eprintln!("{} cuts", out.cuts.len());
    emit(&a.out, &(out.to_json() + "\n"))
}

/// Ok(true) when every cut is valid.
fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let input = Input::load(&a.instance)?;
    let file = CutFile::from_json(&read(&a.cuts)?).map_err(anyhow::Error::msg)?;
    let mut all_valid = true;
    for (n, c) in file.cuts.iter().enumerate() {
        let s = input.set_for(&c.ys)?;
        let v = validity_check(&c.cut, &s)?;
        if v.valid {
            println!("cut {n}: valid (min slack {:.6})", v.min_slack);
        } else {
            all_valid = false;
            let cert = v.certificate.map(|p| serde_json::to_string(&p).expect("point serializes")).unwrap_or_default();
            println!("cut {n}: INVALID (min slack {:.6}) certificate {cert}", v.min_slack);
        }
    }
    Ok(all_valid)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let cfg = a.cfg.load()?;
    let rows = read_manifest(&read(&a.manifest)?)?;
    let jobs = a.jobs.max(1);
    let mut results: Vec<Option<Result<BenchRow, String>>> = vec![None; rows.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|sc| {
        for _ in 0..jobs.min(rows.len().max(1)) {
            sc.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(row) = rows.get(i) else { break };
                let r = run_instance(row, &cfg).map_err(|e| format!("{}: {e}", row.id()));
                slots.lock().expect("no poisoned lock")[i] = Some(r);
            });
        }
    });
    let mut text = format!("{CSV_HEADER}\n");
    let mut group: Vec<BenchRow> = Vec::new();
    let key = |r: &ManifestRow| (r.family, r.nodes, r.param.to_bits());
    for (i, (row, res)) in rows.iter().zip(results).enumerate() {
        let r = res.expect("every row ran").map_err(anyhow::Error::msg)?;
        text += &(r.csv() + "\n");
        group.push(r);
        if rows.get(i + 1).map_or(true, |n| key(n) != key(row)) {
            text += &(average_row(&group) + "\n");
            group.clear();
        }
    }
    emit(&a.out, &text)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(a).map(|_| true),
        Cmd::Cuts(a) => cmd_cuts(a).map(|_| true),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
