//! `kolmo`: generators, discretizers, coders, tests and full pipelines from
//! the command line.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 3 for bad
//! input data, 4 for numeric failures. Verdicts never change the status.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kolmo_core::bitcodec::{BitSequence, SymbolSeries};
use kolmo_core::codecs::{compress_bytes, decompress, Coder, CompressedBlob};
use kolmo_core::discretize::{
    discretize_with_bounds, empirical_quantile_discretize, equal_width_bins, normal_quantile_bounds,
    progressive_discretize, BoundsTable,
};
use kolmo_core::generators::{self as gen, Seed};
use kolmo_core::pipeline::{
    mc_null_distribution, outcome_table, run_pipeline, PipelineReport, PipelineSpec, StageData, DEFAULT_SEED,
    DEFAULT_TRIALS, DEFAULT_WINDOW,
};
use kolmo_core::series::{read_prices_csv, read_returns_csv, write_prices_csv, write_returns_csv, ReturnSeries};
use kolmo_core::stats::{adf_test, bds_test, ljung_box, TestReport, DEFAULT_EPS_MULTIPLES, DEFAULT_M_VALUES};

#[derive(Parser)]
#[command(name = "kolmo", version, about = "Compression-based complexity estimation for time series")]
struct Cli {
    /// Seed for every random draw; echoed to stderr. `rep` falls back to the
    /// config's seed, then to the default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format for reports and tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    ThueMorse,
    Champernowne,
    PiDigits,
    Bernoulli,
    Gaussian,
    Uniform,
    LowbitCase1,
    LowbitCase2,
    ToyE1,
    PiReturns,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    EqualWidth,
    NormalQuantile,
    EmpiricalQuantile,
    Progressive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestName {
    LjungBox,
    Adf,
    Bds,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputKind {
    Prices,
    Returns,
    Symbols,
    Bits,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated series: bit and symbol files, or CSV for real series.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        /// Length (bits, symbols, returns or prices depending on the kind).
        #[arg(long, default_value_t = 32000)]
        n: usize,
        /// Decimals of π for pi-digits and pi-returns.
        #[arg(long, default_value_t = 50000)]
        digits: usize,
        /// Probability of a one for bernoulli.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Symbol width for uniform.
        #[arg(long, default_value_t = 8)]
        width: u8,
        /// Also write the hidden symbol sequence of a lowbit case here.
        #[arg(long)]
        symbols_out: Option<PathBuf>,
    },
    /// Map a returns CSV to a symbol file.
    Discretize {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Scheme::NormalQuantile)]
        scheme: Scheme,
        #[arg(long, default_value_t = 8)]
        width: u8,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        /// Bin against this bounds CSV instead of a scheme.
        #[arg(long)]
        bounds: Option<PathBuf>,
        /// Write the bounds table (equal-width and normal-quantile only).
        #[arg(long)]
        bounds_out: Option<PathBuf>,
    },
    /// Compress any file into a blob.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "cm")]
        coder: String,
    },
    /// Restore the original file from a blob.
    Decompress { input: PathBuf, output: PathBuf },
    /// Run statistical tests on a returns CSV.
    Test {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TestName::All)]
        test: TestName,
        #[arg(long, default_value_t = 36)]
        lags: usize,
        /// ADF augmentation order (default floor((n-1)^(1/3))).
        #[arg(long)]
        adf_lags: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Null distribution of a coder's rate on i.i.d. uniform sequences.
    McNull {
        #[arg(long, default_value = "cm")]
        coder: String,
        #[arg(long, default_value_t = 27423)]
        length: usize,
        #[arg(long, default_value_t = 8)]
        width: u8,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Run a pipeline config on an input file and emit the report.
    Rep {
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = InputKind::Prices)]
        input_kind: InputKind,
        /// Symbol width when the input is a symbol file.
        #[arg(long, default_value_t = 8)]
        width: u8,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Render a report's compression outcomes as CSV tables.
    Tables {
        report: PathBuf,
        /// Write one file per stage here instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Errors in the invocation rather than the data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<kolmo_core::Error>() {
        if e.is_numeric() {
            return 4;
        }
        if matches!(e, kolmo_core::Error::Config(_)) {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn echo(command: &str, seed: u64, params: serde_json::Value) {
    eprintln!("{}", json!({ "command": command, "seed": seed, "params": params }));
}

fn write_out(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn read_file(p: &Path) -> anyhow::Result<Vec<u8>> {
    if p.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        return Ok(buf);
    }
    fs::read(p).map_err(|e| anyhow!(kolmo_core::Error::Io(e))).with_context(|| format!("reading {}", p.display()))
}

fn bits_file(bits: &BitSequence) -> Vec<u8> {
    let symbols = SymbolSeries::new(bits.bits().iter().map(|&b| b as u32).collect(), 1).expect("bits fit");
    symbols.to_file_bytes()
}

fn returns_csv(r: &ReturnSeries) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_returns_csv(&mut buf, r)?;
    Ok(buf)
}

fn parse_coder(s: &str) -> anyhow::Result<Coder> {
    s.parse::<Coder>().map_err(|e| usage(e.to_string()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let seed_value = cli.seed.unwrap_or(DEFAULT_SEED);
    let seed = Seed(seed_value);
    match cli.command {
        Command::Generate { kind, n, digits, p, width, symbols_out } => {
            let name = kind.to_possible_value().expect("named").get_name().to_string();
            echo("generate", seed_value, json!({ "kind": name, "n": n, "digits": digits, "p": p, "width": width }));
            let bytes = match kind {
                Kind::ThueMorse => bits_file(&gen::thue_morse(n)),
                Kind::Champernowne => bits_file(&gen::champernowne_binary(n)),
                Kind::Bernoulli => bits_file(&gen::bernoulli_bits(n, p, seed)?),
                Kind::PiDigits => {
                    let d = gen::pi_decimal_digits(digits);
                    SymbolSeries::from_integers(&d, 4)?.to_file_bytes()
                }
                Kind::Gaussian => returns_csv(&gen::iid_gaussian_returns(n, seed))?,
                Kind::Uniform => gen::uniform_symbols(n, width, seed)?.to_file_bytes(),
                Kind::LowbitCase1 | Kind::LowbitCase2 => {
                    let bits = if kind == Kind::LowbitCase1 { 1 } else { 3 };
                    let (symbols, chron) = gen::hidden_cycle_returns(n, bits, seed)?;
                    if let Some(p) = &symbols_out {
                        fs::write(p, symbols.to_file_bytes())?;
                    }
                    returns_csv(&chron)?
                }
                Kind::ToyE1 => {
                    let toy = gen::toy_price_series(n, seed)?;
                    if let Some(p) = &symbols_out {
                        fs::write(p, bits_file(&toy.source_bits))?;
                    }
                    let mut buf = Vec::new();
                    write_prices_csv(&mut buf, &toy.prices)?;
                    buf
                }
                Kind::PiReturns => {
                    let symbols = gen::pi_symbols(digits)?;
                    eprintln!("{} symbols before the return mapping", symbols.len());
                    if let Some(p) = &symbols_out {
                        fs::write(p, symbols.to_file_bytes())?;
                    }
                    returns_csv(&gen::symbols_to_returns(&symbols, &normal_quantile_bounds(8)?, seed)?)?
                }
            };
            write_out(&cli.out, &bytes)
        }
        Command::Discretize { input, scheme, width, window, bounds, bounds_out } => {
            let name = scheme.to_possible_value().expect("named").get_name().to_string();
            echo("discretize", seed_value, json!({ "scheme": name, "width": width, "window": window }));
            let returns = read_returns_csv(&read_file(&input)?[..])?;
            let (symbols, table): (SymbolSeries, Option<BoundsTable>) = if let Some(b) = bounds {
                let table = BoundsTable::read_csv(&read_file(&b)?[..])?;
                (discretize_with_bounds(&returns, &table)?, None)
            } else {
                match scheme {
                    Scheme::EqualWidth => {
                        let (s, t, _) = equal_width_bins(&returns, width)?;
                        (s, Some(t))
                    }
                    Scheme::NormalQuantile => {
                        let t = normal_quantile_bounds(width)?;
                        (discretize_with_bounds(&returns, &t)?, Some(t))
                    }
                    Scheme::EmpiricalQuantile => (empirical_quantile_discretize(&returns, width)?, None),
                    Scheme::Progressive => (progressive_discretize(&returns, window, width)?, None),
                }
            };
            if let Some(path) = bounds_out {
                let t = table.ok_or_else(|| usage("this scheme has no fixed bounds table"))?;
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                fs::write(path, buf)?;
            }
            write_out(&cli.out, &symbols.to_file_bytes())
        }
        Command::Compress { input, output, coder } => {
            let coder = parse_coder(&coder)?;
            echo("compress", seed_value, json!({ "coder": coder }));
            let data = read_file(&input)?;
            let (blob, outcome) = compress_bytes(coder, &data, 8 * data.len() as u64)?;
            fs::write(&output, blob.to_bytes())?;
            let line = serde_json::to_string(&outcome)? + "\n";
            write_out(&cli.out, line.as_bytes())
        }
        Command::Decompress { input, output } => {
            echo("decompress", seed_value, json!({}));
            let blob = CompressedBlob::from_bytes(&read_file(&input)?)?;
            fs::write(&output, decompress(&blob)?)?;
            Ok(())
        }
        Command::Test { input, test, lags, adf_lags, m, eps } => {
            let m = m.unwrap_or_else(|| DEFAULT_M_VALUES.to_vec());
            let eps = eps.unwrap_or_else(|| DEFAULT_EPS_MULTIPLES.to_vec());
            echo("test", seed_value, json!({ "lags": lags, "adf_lags": adf_lags, "m": m, "eps": eps }));
            let returns = read_returns_csv(&read_file(&input)?[..])?;
            let mut reports: Vec<TestReport> = Vec::new();
            if matches!(test, TestName::LjungBox | TestName::All) {
                reports.push(ljung_box(&returns, lags)?);
            }
            if matches!(test, TestName::Adf | TestName::All) {
                reports.push(adf_test(&returns, adf_lags)?);
            }
            if matches!(test, TestName::Bds | TestName::All) {
                reports.push(bds_test(&returns, &m, &eps)?);
            }
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
                Format::Csv => {
                    let mut s = String::from("test,lags,m,eps_multiple,statistic,p_value\n");
                    for r in &reports {
                        for c in &r.cells {
                            let opt = |v: Option<String>| v.unwrap_or_default();
                            s.push_str(&format!(
                                "{},{},{},{},{},{}\n",
                                r.test,
                                opt(c.lags.map(|v| v.to_string())),
                                opt(c.m.map(|v| v.to_string())),
                                opt(c.eps_multiple.map(|v| v.to_string())),
                                c.statistic,
                                c.p_value
                            ));
                        }
                    }
                    s
                }
            };
            write_out(&cli.out, text.as_bytes())
        }
        Command::McNull { coder, length, width, trials } => {
            let coder = parse_coder(&coder)?;
            echo("mc-null", seed_value, json!({ "coder": coder, "length": length, "width": width, "trials": trials }));
            let null = mc_null_distribution(coder, length, width, trials, seed)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&null)? + "\n",
                Format::Csv => {
                    let mut s = String::from("trial_rank,rate\n");
                    for (i, r) in null.rates.iter().enumerate() {
                        s.push_str(&format!("{i},{r}\n"));
                    }
                    s
                }
            };
            write_out(&cli.out, text.as_bytes())
        }
        Command::Rep { input, config, input_kind, width, trials } => {
            let text = String::from_utf8(read_file(&config)?).map_err(|_| usage("config is not UTF-8"))?;
            let mut spec = PipelineSpec::from_toml(&text)?;
            if cli.seed.is_some() {
                spec.seed = cli.seed;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            echo("rep", spec.seed().0, json!({ "config": config, "trials": spec.trials, "coders": spec.coders }));
            let bytes = read_file(&input)?;
            let data = match input_kind {
                InputKind::Prices => StageData::Prices(read_prices_csv(&bytes[..])?),
                InputKind::Returns => StageData::Returns(read_returns_csv(&bytes[..])?),
                InputKind::Symbols => StageData::Symbols(SymbolSeries::from_file_bytes(&bytes, width)?),
                InputKind::Bits => {
                    let s = SymbolSeries::from_file_bytes(&bytes, 1)?;
                    StageData::Bits(s.symbols().iter().map(|&b| b == 1).collect())
                }
            };
            let report = run_pipeline(&spec, &input.display().to_string(), data)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => tables_text(&report),
            };
            write_out(&cli.out, text.as_bytes())
        }
        Command::Tables { report, out_dir } => {
            echo("tables", seed_value, json!({ "report": report }));
            let report: PipelineReport = serde_json::from_slice(&read_file(&report)?)
                .map_err(|e| anyhow!(kolmo_core::Error::Parse { line: e.line(), msg: e.to_string() }))?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let tables = stage_tables(&report);
                    if tables.is_empty() {
                        fs::write(dir.join("table.csv"), outcome_table(&[]))?;
                    }
                    for (name, table) in tables {
                        fs::write(dir.join(format!("{name}.csv")), table)?;
                    }
                    Ok(())
                }
                None => write_out(&cli.out, tables_text(&report).as_bytes()),
            }
        }
    }
}

fn stage_tables(report: &PipelineReport) -> Vec<(String, String)> {
    report
        .stages
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.outcomes.is_empty())
        .map(|(i, s)| (format!("stage{i}_{}", s.transform), outcome_table(&s.outcomes)))
        .collect()
}

/// All stage tables, each preceded by a `# stage` comment line.
fn tables_text(report: &PipelineReport) -> String {
    let tables = stage_tables(report);
    if tables.is_empty() {
        return outcome_table(&[]);
    }
    tables.into_iter().map(|(name, t)| format!("# {name}\n{t}")).collect::<Vec<_>>().join("\n")
}
