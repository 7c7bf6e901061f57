use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parrondo::format::{sig6, sig6_exact, trunc6};
use parrondo::region::{Surface, VolumeMethod};
use parrondo::simulate::{simulate_absorption, GameSpec};
use parrondo::{
    count_classes, parse_rational, CoefEntry, BigRational, ParamVector, ReducedChain, RegionScanner, RingState, Scalar,
    Symmetry, TablePreset,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "parrondo", version, about = "Cooperative Parrondo games on a ring of players")]
struct Cli {
    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "PARRONDO_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Game {
    A,
    B,
    C,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Riemann,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "muB")]
    MuB,
    #[value(name = "muC")]
    MuC,
}

fn rational(s: &str) -> std::result::Result<BigRational, String> {
    parse_rational(s).ok_or_else(|| format!("'{s}' is not a number or fraction"))
}

#[derive(Args)]
struct Coins {
    #[arg(long, value_parser = rational)]
    p0: Option<BigRational>,
    #[arg(long, value_parser = rational)]
    p1: Option<BigRational>,
    /// Defaults to p1.
    #[arg(long, value_parser = rational)]
    p2: Option<BigRational>,
    #[arg(long, value_parser = rational)]
    p3: Option<BigRational>,
    /// All four coins at once, as `p0,p1,p2,p3`.
    #[arg(long, conflicts_with_all = ["p0", "p1", "p2", "p3"])]
    params: Option<String>,
    /// Win probability of game A.
    #[arg(long, value_parser = rational, default_value = "1/2")]
    p: BigRational,
    /// Weight of game A in the mixture C.
    #[arg(long, value_parser = rational, default_value = "1/2")]
    gamma: BigRational,
}

impl Coins {
    fn params(&self) -> Result<ParamVector<BigRational>> {
        let [p0, p1, p2, p3] = match &self.params {
            Some(list) => {
                let v: Vec<BigRational> =
                    list.split(',').map(rational).collect::<std::result::Result<_, _>>().map_err(anyhow::Error::msg)?;
                let Ok(arr) = <[BigRational; 4]>::try_from(v) else {
                    bail!("--params needs exactly four comma-separated values");
                };
                arr
            }
            None => {
                let need = |v: &Option<BigRational>, name: &str| {
                    v.clone().with_context(|| format!("missing --{name} (or --params)"))
                };
                let p1 = need(&self.p1, "p1")?;
                [need(&self.p0, "p0")?, p1.clone(), self.p2.clone().unwrap_or(p1), need(&self.p3, "p3")?]
            }
        };
        Ok(ParamVector::with_mixture(p0, p1, p2, p3, self.p.clone(), self.gamma.clone())?)
    }
}

fn default_symmetry(sym: Option<Symmetry>, params: &ParamVector<BigRational>) -> Symmetry {
    sym.unwrap_or(if params.reflection_symmetric() { Symmetry::Dihedral } else { Symmetry::Cyclic })
}

#[derive(Subcommand)]
enum Command {
    /// Count (or list) the equivalence classes of configurations.
    Classes {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "dihedral")]
        symmetry: Symmetry,
        /// List every class instead of the count.
        #[arg(long)]
        list: bool,
    },
    /// Symbolic lumped transition matrix.
    Matrix {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "dihedral")]
        symmetry: Symmetry,
        /// Print the payoff-weighted row sums instead.
        #[arg(long)]
        drift: bool,
        /// Evaluate at `p0,p1,p2,p3`; entries stay symbolic without it.
        #[arg(long)]
        params: Option<String>,
        /// Print evaluated entries as fractions.
        #[arg(long, requires = "params")]
        exact: bool,
    },
    /// Stationary distribution over classes.
    Stationary {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        symmetry: Option<Symmetry>,
        #[command(flatten)]
        coins: Coins,
        #[arg(long)]
        exact: bool,
    },
    /// Mean profit per turn of games A, B and C.
    Mu {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        symmetry: Option<Symmetry>,
        #[command(flatten)]
        coins: Coins,
        #[arg(long)]
        exact: bool,
    },
    /// Parrondo p1-interval along a fixed (p0, p3) line.
    Interval {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        p0: BigRational,
        #[arg(long, value_parser = rational)]
        p3: BigRational,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Print endpoints to full double precision instead of six
        /// truncated decimals.
        #[arg(long)]
        exact: bool,
    },
    /// Volume of the Parrondo region.
    Volume {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Method::Riemann)]
        method: Method,
        #[arg(long, default_value_t = 100)]
        grid: u32,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Interval and rates for one of the published parameter lines.
    Table {
        #[arg(long)]
        name: TablePreset,
        #[arg(long, default_value_t = 3)]
        nmin: u32,
        #[arg(long)]
        nmax: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// mu_B or mu_C at the cell centers of a grid over the cube.
    Surface {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        grid: u32,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play the games and report the profit.
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        game: Game,
        #[command(flatten)]
        coins: Coins,
        #[arg(long)]
        turns: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial configuration such as 0101; random when omitted.
        #[arg(long)]
        initial: Option<String>,
        /// Also run the complement-coupled mirror process.
        #[arg(long)]
        coupled: bool,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Absorption at all-ones when p0 = 0 and p3 = 1.
    Absorb {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        p1: BigRational,
        #[arg(long, value_parser = rational)]
        p2: Option<BigRational>,
        #[arg(long)]
        initial: String,
        /// Also estimate by simulation with this many replications.
        #[arg(long)]
        replications: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Every command emits one table; CSV and JSON are two renderings of it.
struct Table {
    command: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table { command, columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write(&self, format: Format, out: impl Write) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "command": self.command,
                    "columns": self.columns,
                    "rows": self.rows,
                });
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<Table> {
    match cli.command {
        Command::Classes { n, symmetry, list } => {
            if list {
                let mut t = Table::new("classes", &["canonical_decimal", "orbit_size", "ones_count"]);
                for c in parrondo::enumerate_classes(n, symmetry)? {
                    t.push(vec![c.canonical.bits().to_string(), c.orbit_size.to_string(), c.ones_count.to_string()]);
                }
                Ok(t)
            } else {
                let mut t = Table::new("classes", &["n", "symmetry", "classes"]);
                t.push(vec![n.to_string(), symmetry.to_string(), count_classes(n, symmetry)?.to_string()]);
                Ok(t)
            }
        }
        Command::Matrix { n, symmetry, drift, params, exact } => {
            let chain = ReducedChain::build(n, symmetry)?;
            let params = match params {
                Some(list) => {
                    let half = parrondo::rat(1, 2);
                    let coins =
                        Coins { p0: None, p1: None, p2: None, p3: None, params: Some(list), p: half.clone(), gamma: half };
                    let v = coins.params()?;
                    chain.check_params(&v)?;
                    Some(v)
                }
                None => None,
            };
            let show = |e: &CoefEntry| match &params {
                None => e.to_string(),
                Some(v) if exact => e.eval(v).to_string(),
                Some(v) => sig6(e.eval(&v.to_f64())),
            };
            if drift {
                let mut t = Table::new("matrix", &["class", "drift"]);
                for (c, d) in chain.classes.iter().zip(chain.drift()) {
                    t.push(vec![c.canonical.to_string(), show(&d)]);
                }
                return Ok(t);
            }
            let mut t = Table::new("matrix", &["from", "to", "entry"]);
            for (i, row) in chain.matrix.rows.iter().enumerate() {
                for (j, e) in row {
                    t.push(vec![chain.classes[i].canonical.to_string(), chain.classes[*j].canonical.to_string(), show(e)]);
                }
            }
            Ok(t)
        }
        Command::Stationary { n, symmetry, coins, exact } => {
            let params = coins.params()?;
            let chain = ReducedChain::build(n, default_symmetry(symmetry, &params))?;
            let mut t = Table::new("stationary", &["class", "weight"]);
            let weights: Vec<String> = if exact {
                chain.stationary(&params)?.weights.iter().map(|w| w.to_string()).collect()
            } else {
                chain.stationary(&params.to_f64())?.weights.iter().map(|w| sig6(*w)).collect()
            };
            for (c, w) in chain.classes.iter().zip(weights) {
                t.push(vec![c.canonical.to_string(), w]);
            }
            Ok(t)
        }
        Command::Mu { n, symmetry, coins, exact } => {
            let params = coins.params()?;
            let chain = ReducedChain::build(n, default_symmetry(symmetry, &params))?;
            let mut t = Table::new("mu", &["quantity", "value"]);
            let values: Vec<String> = if exact {
                let r = chain.mean_report(&params)?;
                [r.mu_a, r.mu_b, r.mu_c].iter().map(|v| v.to_string()).collect()
            } else {
                let r = chain.mean_report(&params.to_f64())?;
                [r.mu_a, r.mu_b, r.mu_c].iter().map(|v| sig6(*v)).collect()
            };
            for (q, v) in ["mu_A", "mu_B", "mu_C"].into_iter().zip(values) {
                t.push(vec![q.to_string(), v]);
            }
            Ok(t)
        }
        Command::Interval { n, p0, p3, tol, exact } => {
            let (p0, p3) = (Scalar::to_f64(&p0), Scalar::to_f64(&p3));
            let iv = RegionScanner::new(n)?.parrondo_interval(p0, p3, tol)?;
            let show = |x: f64| if exact { format!("{x:.17}") } else { trunc6(x) };
            let mut t = Table::new("interval", &["n", "p0", "p3", "lower", "upper", "empty"]);
            let (lo, hi) = if iv.empty { (String::new(), String::new()) } else { (show(iv.lower), show(iv.upper)) };
            t.push(vec![n.to_string(), p0.to_string(), p3.to_string(), lo, hi, iv.empty.to_string()]);
            Ok(t)
        }
        Command::Volume { n, method, grid, samples, seed } => {
            let scanner = RegionScanner::new(n)?;
            let est = match method {
                Method::Riemann => scanner.volume_riemann(grid)?,
                Method::Mc => scanner.volume_monte_carlo(samples, seed)?,
            };
            let method = match est.method {
                VolumeMethod::Riemann => "riemann",
                VolumeMethod::MonteCarlo => "mc",
                VolumeMethod::ClosedForm => "closed",
            };
            let mut t = Table::new(
                "volume",
                &["n", "method", "volume", "grid_or_samples", "hits", "stderr", "seed"],
            );
            t.push(vec![
                n.to_string(),
                method.to_string(),
                sig6(est.volume),
                est.grid_or_samples.to_string(),
                est.hits.to_string(),
                est.stderr.map(sig6).unwrap_or_default(),
                est.seed.map(|s| s.to_string()).unwrap_or_default(),
            ]);
            Ok(t)
        }
        Command::Table { name, nmin, nmax, tol } => {
            if nmin < 3 || nmax < nmin {
                bail!("need 3 <= nmin <= nmax");
            }
            let rows = (nmin..=nmax)
                .into_par_iter()
                .map(|n| parrondo::region::table_row(n, name, tol))
                .collect::<parrondo::Result<Vec<_>>>()?;
            let mut t = Table::new("table", &["n", "lower", "upper", "empty", "mu_b", "mu_c"]);
            for r in rows {
                let (lo, hi) = if r.interval.empty {
                    (String::new(), String::new())
                } else {
                    (trunc6(r.interval.lower), trunc6(r.interval.upper))
                };
                t.push(vec![
                    r.n.to_string(),
                    lo,
                    hi,
                    r.interval.empty.to_string(),
                    sig6_exact(&r.mu_b),
                    sig6_exact(&r.mu_c),
                ]);
            }
            Ok(t)
        }
        Command::Surface { n, grid, which, out } => {
            let which = match which {
                Which::MuB => Surface::MuB,
                Which::MuC => Surface::MuC,
            };
            let rows = RegionScanner::new(n)?.surface_grid(grid, which)?;
            let mut t = Table::new("surface", &["p0", "p3", "p1", "value"]);
            for r in rows {
                t.push(r.iter().map(|x| x.to_string()).collect());
            }
            if let Some(path) = out {
                let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                t.write(Format::Csv, f)?;
                let mut summary = Table::new("surface", &["path", "rows"]);
                summary.push(vec![path.display().to_string(), t.rows.len().to_string()]);
                return Ok(summary);
            }
            Ok(t)
        }
        Command::Simulate { n, game, coins, turns, seed, initial, coupled, trace_out } => {
            let params = coins.params()?.to_f64();
            let initial = initial.map(|s| RingState::parse(&s)).transpose()?;
            let spec = match game {
                Game::A => GameSpec::A,
                Game::B => GameSpec::B,
                Game::C => GameSpec::MixedC(params.gamma),
            };
            let traces = if coupled {
                if !matches!(game, Game::B) {
                    bail!("--coupled applies to game b only");
                }
                let (a, b) = parrondo::coupled_simulate(n, &params, turns, seed, initial)?;
                vec![("original", a), ("mirror", b)]
            } else {
                vec![("original", parrondo::simulate(n, &params, spec, turns, seed, initial)?)]
            };
            if let Some(path) = trace_out {
                write_trace(&path, &traces)?;
            }
            let mut t = Table::new("simulate", &["process", "turns", "sum", "mean", "stderr", "final_state"]);
            for (name, tr) in &traces {
                t.push(vec![
                    name.to_string(),
                    tr.turns.to_string(),
                    tr.total().to_string(),
                    sig6(tr.mean()),
                    sig6(tr.sample_stderr()),
                    tr.final_state.to_string(),
                ]);
            }
            Ok(t)
        }
        Command::Absorb { n, p1, p2, initial, replications, seed } => {
            let p2 = p2.unwrap_or_else(|| p1.clone());
            let params = ParamVector::new(parrondo::rat(0, 1), p1, p2, parrondo::rat(1, 1))?;
            let x = RingState::parse(&initial)?;
            let report = parrondo::absorption_analysis(n, &params, x)?;
            let mut t = Table::new("absorb", &["initial", "class", "prob_ones", "mu_b", "mc_prob", "mc_stderr"]);
            let (mc, se) = match replications {
                Some(r) => {
                    let est = simulate_absorption(n, &params.to_f64(), x, r, seed)?;
                    (sig6(est.prob), sig6(est.stderr))
                }
                None => (String::new(), String::new()),
            };
            t.push(vec![
                initial,
                report.initial_class.canonical.to_string(),
                sig6_exact(&report.prob_absorb_at_ones),
                sig6_exact(&report.mu_b),
                mc,
                se,
            ]);
            Ok(t)
        }
    }
}

fn write_trace(path: &PathBuf, traces: &[(&str, parrondo::ProfitTrace)]) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(f);
    let mut header = vec!["turn".to_string()];
    for (name, _) in traces {
        let prefix = if *name == "original" { String::new() } else { format!("{name}_") };
        header.push(format!("{prefix}increment"));
        header.push(format!("{prefix}sum"));
    }
    w.write_record(&header)?;
    let turns = traces[0].1.turns as usize;
    for k in 0..turns {
        let mut rec = vec![(k + 1).to_string()];
        for (_, tr) in traces {
            rec.push(tr.increments[k].to_string());
            rec.push(tr.sums[k].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let format = cli.format;
    match run(cli).and_then(|t| t.write(format, io::stdout().lock())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
