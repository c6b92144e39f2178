use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pswef::analysis::{compare_report, union_bound_bler, union_bound_bler_ln, CodeReport};
use pswef::construction::{construct_code_with, ConstructionRule, ReliabilitySequence, DEFAULT_DESIGN_SNR_DB};
use pswef::high_weight::{estimate_spectrum, EstimatorConfig, SpectrumEstimate};
use pswef::io::{cache_load_path, cache_store_path, read_spectrum, Format, SpectrumFile, SpectrumMeta};
use pswef::low_weight::{low_weight_spectrum, CountStatus};
use pswef::wef::{exact_spectrum, DEFAULT_MF_BUDGET};
use pswef::{CodeSpec, ConvPolynomial, Error, WefCache};

/// Directory holding the default WEF cache file when `--cache` is absent.
const CACHE_DIR_ENV: &str = "PSWEF_CACHE_DIR";
const CACHE_FILE_NAME: &str = "wef-cache.pswef";

#[derive(Parser)]
#[command(name = "pswef", version, about = "Weight distributions of polar and PAC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print N, k, τ, MF and the information set.
    Info(CodeArgs),
    /// Low-weight counts from list-decoder-selected cosets.
    Low {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        low: LowArgs,
    },
    /// Sampled estimate of the whole spectrum.
    High {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        high: HighArgs,
    },
    /// Exact spectrum by summing every coset (needs a small MF).
    Exact {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = DEFAULT_MF_BUDGET)]
        mf_budget: usize,
    },
    /// Union-bound BLER over an Eb/N0 range (dB).
    Bound {
        #[command(flatten)]
        code: CodeArgs,
        /// start:step:stop in dB
        #[arg(long, default_value = "0:0.5:6")]
        ebn0: String,
        /// Spectrum file to use instead of computing the exact spectrum.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MF_BUDGET)]
        mf_budget: usize,
    },
    /// Low-weight rows for several constructions of the same (N, k).
    Compare {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        low: LowArgs,
        /// Rows as construction[:octal], e.g. `5g rm:133 ga:133`.
        #[arg(long = "row", num_args = 1.., default_values = ["5g", "rm:133", "ga:133"])]
        rows: Vec<String>,
    },
    /// Normalized log counts on the full weight axis 0..=N.
    PlotData {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = Source::Exact)]
        source: Source,
        #[command(flatten)]
        high: HighArgs,
        #[command(flatten)]
        low: LowArgs,
        #[arg(long, default_value_t = DEFAULT_MF_BUDGET)]
        mf_budget: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Exact,
    High,
    Low,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    #[value(name = "5g")]
    FiveG,
    Rm,
    Ga,
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Construction::FiveG)]
    construction: Construction,
    /// GA design SNR, Eb/N0 in dB.
    #[arg(long, default_value_t = DEFAULT_DESIGN_SNR_DB)]
    design_snr: f64,
    /// PAC convolution polynomial in octal (e.g. 133); omit for plain polar.
    #[arg(long)]
    conv: Option<String>,
    /// Reliability sequence file (one index per line, least reliable first).
    #[arg(long)]
    seq: Option<PathBuf>,
    /// WEF cache file, loaded before and saved after the run.
    #[arg(long, env = CACHE_DIR_ENV, value_parser = cache_path)]
    cache: Option<PathBuf>,
    /// Stop growing the in-memory cache after this many coefficients (0 = no limit).
    #[arg(long, default_value_t = 4_000_000)]
    cache_limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    format: Format,
}

#[derive(Args, Clone)]
struct LowArgs {
    #[arg(long, default_value_t = 1000)]
    list: usize,
    #[arg(long, default_value_t = 32)]
    wmax: usize,
}

#[derive(Args, Clone)]
struct HighArgs {
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 20)]
    window: usize,
    /// Defaults to the window size.
    #[arg(long)]
    min_samples: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    max_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

/// A directory (from the environment) becomes the default file inside it.
fn cache_path(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    Ok(if p.is_dir() { p.join(CACHE_FILE_NAME) } else { p })
}

fn rule(c: Construction, design_snr: f64) -> ConstructionRule {
    match c {
        Construction::FiveG => ConstructionRule::FiveG,
        Construction::Rm => ConstructionRule::ReedMuller,
        Construction::Ga => ConstructionRule::GaussianApprox { design_snr_db: design_snr },
    }
}

struct Ctx {
    args: CodeArgs,
    seq: Option<ReliabilitySequence>,
    cache: WefCache,
}

impl Ctx {
    fn new(args: CodeArgs) -> Result<Self, Error> {
        let seq = args.seq.as_deref().map(ReliabilitySequence::load).transpose()?;
        let cache = match args.cache_limit {
            0 => WefCache::new(),
            l => WefCache::with_limit(l),
        };
        if let Some(path) = &args.cache {
            if path.exists() {
                cache_load_path(path, &cache)?;
            }
        }
        Ok(Ctx { args, seq, cache })
    }

    fn build(&self, c: Construction, conv: Option<&str>) -> Result<CodeSpec, Error> {
        let pre = conv.map(ConvPolynomial::from_octal).transpose()?;
        construct_code_with(self.args.n, self.args.k, rule(c, self.args.design_snr), pre, self.seq.as_ref())
    }

    fn code(&self) -> Result<CodeSpec, Error> {
        self.build(self.args.construction, self.args.conv.as_deref())
    }

    fn meta(&self, code: &CodeSpec, provenance: pswef::io::Provenance) -> SpectrumMeta {
        let mut m = SpectrumMeta::new(
            code.length(),
            code.dimension(),
            rule(self.args.construction, self.args.design_snr).to_string(),
            code.precoder().map(|c| c.to_octal()),
            provenance,
        );
        if let (Ok(t), Ok(mf)) = (code.last_frozen_index(), code.mixing_factor()) {
            m.last_frozen_index = Some(t);
            m.mixing_factor = Some(mf);
        }
        m
    }

    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.args.out {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), Error> {
        if let Some(path) = &self.args.cache {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            cache_store_path(path, &self.cache)?;
        }
        Ok(())
    }
}

fn estimate(ctx: &Ctx, code: &CodeSpec, h: &HighArgs) -> Result<SpectrumEstimate, Error> {
    let cfg = EstimatorConfig {
        eps: h.eps,
        window: h.window,
        min_samples: h.min_samples.unwrap_or(h.window),
        max_samples: h.max_samples,
        ..EstimatorConfig::default()
    };
    let est = estimate_spectrum(code, &cfg, &mut ChaCha8Rng::seed_from_u64(h.seed), &ctx.cache)?;
    if !est.converged {
        eprintln!("warning: not converged after {} samples", est.samples);
    }
    Ok(est)
}

fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidParameter(format!("expected start:step:stop, got {s:?}"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [start, step, stop] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn report_table(rows: &[CodeReport], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("id,n,k,tau,mf,list,d_min,certified,entries\n");
            for r in rows {
                let entries: Vec<String> = r
                    .entries
                    .iter()
                    .map(|e| format!("A{}{}{}", e.weight, if e.status == CountStatus::LowerBound { "≥" } else { "=" }, e.count))
                    .collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.id,
                    r.length,
                    r.dimension,
                    r.last_frozen_index,
                    r.mixing_factor,
                    r.list_size,
                    r.d_min.map_or(String::new(), |d| d.weight.to_string()),
                    r.d_min.is_some_and(|d| d.certified),
                    entries.join(" ")
                ));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "id": r.id, "n": r.length, "k": r.dimension,
                        "tau": r.last_frozen_index, "mf": r.mixing_factor, "list": r.list_size,
                        "d_min": r.d_min.map(|d| d.weight),
                        "certified": r.d_min.is_some_and(|d| d.certified),
                        "entries": r.entries.iter().map(|e| serde_json::json!({
                            "w": e.weight,
                            "count": e.count.to_string(),
                            "flag": if e.status == CountStatus::LowerBound { "lower-bound" } else { "exact" },
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).unwrap() + "\n"
        }
    }
}

fn plot_rows(n: usize, k: usize, ln: impl Fn(usize) -> Option<f64>, format: Format) -> String {
    let norm = |w| ln(w).map(|l| l - k as f64 * std::f64::consts::LN_2);
    match format {
        Format::Csv => {
            let mut out = String::from("w,ln_count,normalized_ln\n");
            for w in 0..=n {
                let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!("{w},{},{}\n", f(ln(w)), f(norm(w))));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = (0..=n)
                .map(|w| serde_json::json!({ "w": w, "ln_count": ln(w), "normalized_ln": norm(w) }))
                .collect();
            serde_json::to_string_pretty(&rows).unwrap() + "\n"
        }
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    use pswef::io::Provenance;
    match cmd {
        Command::Info(args) => {
            let ctx = Ctx::new(args)?;
            let code = ctx.code()?;
            let info: Vec<String> = code.info_set().iter().map(|i| i.to_string()).collect();
            let frozen: Vec<String> = code.frozen_set().iter().map(|i| i.to_string()).collect();
            let opt = |r: Result<usize, Error>| r.map_or("-".to_string(), |v| v.to_string());
            let text = format!(
                "n={}\nk={}\nconstruction={}\nprecoder={}\ntau={}\nmf={}\ninfo_set={}\nfrozen_set={}\n",
                code.length(),
                code.dimension(),
                rule(ctx.args.construction, ctx.args.design_snr),
                code.precoder().map_or("none".to_string(), |c| c.to_octal()),
                opt(code.last_frozen_index()),
                opt(code.mixing_factor()),
                info.join(" "),
                frozen.join(" "),
            );
            ctx.emit(&text)
        }
        Command::Low { code, low } => {
            let ctx = Ctx::new(code)?;
            let code = ctx.code()?;
            let report = low_weight_spectrum(&code, low.list, low.wmax, &ctx.cache)?;
            let file = SpectrumFile::from_low_weight(ctx.meta(&code, Provenance::LowWeight), &report);
            ctx.emit(&file.render(ctx.args.format)?)?;
            ctx.finish()
        }
        Command::High { code, high } => {
            let ctx = Ctx::new(code)?;
            let code = ctx.code()?;
            let est = estimate(&ctx, &code, &high)?;
            let mut meta = ctx.meta(&code, Provenance::Estimate);
            meta.seed = Some(high.seed);
            ctx.emit(&SpectrumFile::from_estimate(meta, &est).render(ctx.args.format)?)?;
            ctx.finish()
        }
        Command::Exact { code, mf_budget } => {
            let ctx = Ctx::new(code)?;
            let code = ctx.code()?;
            let spec = exact_spectrum(&code, &ctx.cache, mf_budget)?;
            ctx.emit(&SpectrumFile::from_exact(ctx.meta(&code, Provenance::Exact), &spec).render(ctx.args.format)?)?;
            ctx.finish()
        }
        Command::Bound { code, ebn0, spectrum, mf_budget } => {
            let ctx = Ctx::new(code)?;
            let code = ctx.code()?;
            let points = parse_range(&ebn0)?;
            let rate = code.rate();
            let values: Vec<f64> = match spectrum {
                Some(path) => {
                    let file = read_spectrum(&path)?;
                    let ln: Vec<(usize, f64)> = file.rows.iter().filter_map(|r| Some((r.w, r.count.ln()?))).collect();
                    points.iter().map(|&db| union_bound_bler_ln(&ln, db, rate)).collect()
                }
                None => {
                    let spec = exact_spectrum(&code, &ctx.cache, mf_budget)?;
                    points.iter().map(|&db| union_bound_bler(&spec, db, rate)).collect()
                }
            };
            let text = match ctx.args.format {
                Format::Csv => {
                    let mut s = String::from("ebn0_db,bler_bound\n");
                    for (db, p) in points.iter().zip(&values) {
                        s.push_str(&format!("{db},{p:e}\n"));
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<_> = points
                        .iter()
                        .zip(&values)
                        .map(|(db, p)| serde_json::json!({ "ebn0_db": db, "bler_bound": p }))
                        .collect();
                    serde_json::to_string_pretty(&rows).unwrap() + "\n"
                }
            };
            ctx.emit(&text)?;
            ctx.finish()
        }
        Command::Compare { code, low, rows } => {
            let ctx = Ctx::new(code)?;
            let codes = rows
                .iter()
                .map(|spec| {
                    let (name, conv) = match spec.split_once(':') {
                        Some((c, o)) => (c, Some(o)),
                        None => (spec.as_str(), None),
                    };
                    let c = Construction::from_str(name, true)
                        .map_err(|_| Error::InvalidParameter(format!("unknown construction {name:?}")))?;
                    let label = match conv {
                        Some(o) => format!("{} PAC[{o}]", rule(c, ctx.args.design_snr)),
                        None => format!("{} polar", rule(c, ctx.args.design_snr)),
                    };
                    Ok((label, ctx.build(c, conv)?))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let report = compare_report(&codes, low.list, low.wmax, &ctx.cache)?;
            ctx.emit(&report_table(&report, ctx.args.format))?;
            ctx.finish()
        }
        Command::PlotData { code, source, high, low, mf_budget } => {
            let ctx = Ctx::new(code)?;
            let code = ctx.code()?;
            let (n, k) = (code.length(), code.dimension());
            let text = match source {
                Source::Exact => {
                    let spec = exact_spectrum(&code, &ctx.cache, mf_budget)?;
                    plot_rows(n, k, |w| spec.ln_coeff(w), ctx.args.format)
                }
                Source::High => {
                    let est = estimate(&ctx, &code, &high)?;
                    plot_rows(n, k, |w| est.ln_estimate(w), ctx.args.format)
                }
                Source::Low => {
                    let rep = low_weight_spectrum(&code, low.list, low.wmax.max(n), &ctx.cache)?;
                    plot_rows(n, k, |w| rep.spectrum.ln_coeff(w), ctx.args.format)
                }
            };
            ctx.emit(&text)?;
            ctx.finish()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
