//! `dialogre` command-line tool.
//!
//! Exit status: 0 on success, 1 when an input fails validation, 2 on usage
//! errors and unreadable or unwritable files. Diagnostics go to stderr;
//! `--json` puts a machine-readable report on stdout.

use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dialogre::baselines::{predict_conversational, predict_standard, train_majority};
use dialogre::corpus::{
    anonymize_corpus, complete_inverses, generate_negative_candidates, serialize_corpus, split_corpus, Corpus,
    CorpusError, Format, SplitTag, ValidationError,
};
use dialogre::io::{load_corpus, write_atomic, LoadError};
use dialogre::metrics::{
    conversational_f1, read_conversational_predictions, read_standard_predictions, standard_f1,
    write_conversational_predictions, write_standard_predictions, EvalReport,
};
use dialogre::preprocess::{build_input, truncate, InputVariant};
use dialogre::stats::{distance_histogram_csv, relation_histogram_csv, summarize};

#[derive(Parser)]
#[command(name = "dialogre", version, about = "Dialogue relation extraction corpus and evaluation toolkit")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for per-instance work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Corpus file layout.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Auto)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Canonical,
    Released,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Auto => Format::Auto,
            FormatArg::Canonical => Format::Canonical,
            FormatArg::Released => Format::Released,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    Conversational,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for SplitTag {
    fn from(s: SplitArg) -> SplitTag {
        match s {
            SplitArg::Train => SplitTag::Train,
            SplitArg::Dev => SplitTag::Dev,
            SplitArg::Test => SplitTag::Test,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Base,
    Speaker,
    Typed,
    SpeakerTyped,
    MentionReplaced,
    MentionReplacedArgs,
    SubjObj,
    SubjObjArgs,
    BoundaryMarked,
    TriggerAppended,
}

impl From<VariantArg> for InputVariant {
    fn from(v: VariantArg) -> InputVariant {
        match v {
            VariantArg::Base => InputVariant::Base,
            VariantArg::Speaker => InputVariant::Speaker,
            VariantArg::Typed => InputVariant::Typed,
            VariantArg::SpeakerTyped => InputVariant::SpeakerTyped,
            VariantArg::MentionReplaced => InputVariant::MentionReplaced,
            VariantArg::MentionReplacedArgs => InputVariant::MentionReplacedArgs,
            VariantArg::SubjObj => InputVariant::SubjObj,
            VariantArg::SubjObjArgs => InputVariant::SubjObjArgs,
            VariantArg::BoundaryMarked => InputVariant::BoundaryMarked,
            VariantArg::TriggerAppended => InputVariant::TriggerAppended,
        }
    }
}

#[derive(Args)]
struct InOut {
    /// Input corpus.
    input: PathBuf,
    /// Output corpus (canonical layout).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct Scoring {
    /// Gold corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Prediction JSON Lines file.
    #[arg(long)]
    pred: PathBuf,
    /// Score only the dialogues tagged with this split.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Check corpus files against every corpus invariant.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Merge corpus files into one canonical file.
    Convert {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rename speakers to `Speaker N` throughout each dialogue.
    Anonymize(InOut),
    /// Add the missing inverse triple of every invertible relation.
    CompleteInverses(InOut),
    /// Write candidate no-relation instances for unannotated argument pairs.
    GenNegatives {
        #[command(flatten)]
        io: InOut,
        /// Keep the annotated instances and append the candidates.
        #[arg(long)]
        append: bool,
    },
    /// Tag dialogues train/dev/test with a seeded 60/20/20 split.
    Split {
        #[command(flatten)]
        io: InOut,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write model input sequences as JSON Lines.
    BuildInputs {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// Whitespace-token budget per sequence.
        #[arg(long)]
        max_tokens: Option<usize>,
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
        /// Skip instances the variant cannot be built for instead of failing.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Train the majority baseline and write its predictions.
    Majority {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        predict: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
        #[arg(short, long)]
        output: PathBuf,
        /// Use only dialogues of this split from the training corpus.
        #[arg(long, value_enum)]
        train_split: Option<SplitArg>,
        /// Predict only dialogues of this split.
        #[arg(long, value_enum)]
        predict_split: Option<SplitArg>,
    },
    /// Corpus statistics as JSON, with optional CSV histograms.
    Stats {
        input: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Directory for `distance_min.csv`, `distance_avg.csv` and `relation_types.csv`.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Standard micro-averaged precision, recall and F1.
    Score(Scoring),
    /// Conversational precision, recall and F1 over dialogue prefixes.
    ScoreConversational(Scoring),
}

/// A failed command: exit status and diagnostic lines.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn invalid(lines: Vec<String>) -> Self {
        Failure { code: 1, lines }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, lines: vec![msg.into()] }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match &e {
            LoadError::Io { .. } => Failure::usage(e.to_string()),
            LoadError::Corpus { path, source } => Failure::invalid(corpus_diagnostics(path, source)),
        }
    }
}

fn corpus_diagnostics(path: &Path, e: &CorpusError) -> Vec<String> {
    match e {
        CorpusError::Parse(p) => vec![format!("{}: {p}", path.display())],
        CorpusError::Validation(v) => v.violations.iter().map(|x| format!("{}: {x}", path.display())).collect(),
    }
}

type Outcome = Result<Value, Failure>;

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn select(c: Corpus, split: Option<SplitArg>) -> Result<Corpus, Failure> {
    match split {
        None => Ok(c),
        Some(s) if c.splits().is_none() => {
            Err(Failure::usage(format!("--split {} needs a corpus with split tags", SplitTag::from(s).as_str())))
        }
        Some(s) => Ok(c.select_split(s.into())),
    }
}

fn counts(c: &Corpus) -> Value {
    json!({"dialogues": c.num_dialogues(), "instances": c.instances().len(), "triples": c.num_triples()})
}

fn write_corpus(path: &Path, c: &Corpus) -> Result<(), Failure> {
    write_out(path, serialize_corpus(c).as_bytes())
}

fn violations(v: ValidationError) -> Failure {
    Failure::invalid(v.violations.iter().map(|x| x.to_string()).collect())
}

fn score(cli_format: Format, s: &Scoring, conversational: bool) -> Outcome {
    let corpus = select(load_corpus(&s.corpus, cli_format)?, s.split)?;
    let file = std::fs::File::open(&s.pred).map_err(|e| Failure::usage(format!("{}: {e}", s.pred.display())))?;
    let reader = BufReader::new(file);
    let diag = |e: dialogre::metrics::MetricsError| Failure::invalid(vec![format!("{}: {e}", s.pred.display())]);
    let report: EvalReport = if conversational {
        let preds = read_conversational_predictions(reader).map_err(diag)?;
        conversational_f1(&corpus, &preds).map_err(diag)?
    } else {
        let preds = read_standard_predictions(reader).map_err(diag)?;
        standard_f1(&corpus, &preds).map_err(diag)?
    };
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok(json!({"report": value, "table": report.to_table()}))
}

fn run(cli: &Cli) -> Outcome {
    let fmt: Format = cli.format.into();
    match &cli.command {
        Command::Validate { inputs } => {
            let mut lines = Vec::new();
            let mut files = Vec::new();
            for p in inputs {
                match load_corpus(p, fmt) {
                    Ok(c) => files.push(json!({"path": p.display().to_string(), "valid": true, "counts": counts(&c)})),
                    Err(LoadError::Corpus { path, source }) => {
                        let diags = corpus_diagnostics(&path, &source);
                        files.push(json!({"path": p.display().to_string(), "valid": false, "violations": diags}));
                        lines.extend(diags);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if lines.is_empty() {
                Ok(json!({"command": "validate", "valid": true, "files": files}))
            } else {
                Err(Failure::invalid(lines))
            }
        }
        Command::Convert { inputs, output } => {
            let parts = inputs.iter().map(|p| load_corpus(p, fmt)).collect::<Result<Vec<_>, _>>()?;
            let merged = Corpus::merge(parts).map_err(violations)?;
            write_corpus(output, &merged)?;
            Ok(json!({"command": "convert", "output": output.display().to_string(), "counts": counts(&merged)}))
        }
        Command::Anonymize(io) => {
            let c = load_corpus(&io.input, fmt)?;
            let (anon, aliases) = anonymize_corpus(&c).map_err(|e| Failure::invalid(vec![e.to_string()]))?;
            write_corpus(&io.output, &anon)?;
            Ok(json!({"command": "anonymize", "output": io.output.display().to_string(), "aliases": aliases}))
        }
        Command::CompleteInverses(io) => {
            let c = load_corpus(&io.input, fmt)?;
            let before = c.num_triples();
            let completed = complete_inverses(c.instances());
            let c = c.with_instances(completed).map_err(violations)?;
            write_corpus(&io.output, &c)?;
            Ok(json!({"command": "complete-inverses", "output": io.output.display().to_string(),
                      "triples_added": c.num_triples() - before, "counts": counts(&c)}))
        }
        Command::GenNegatives { io, append } => {
            let c = load_corpus(&io.input, fmt)?;
            let cands = generate_negative_candidates(&c);
            let n = cands.len();
            let instances = if *append { c.instances().iter().cloned().chain(cands).collect() } else { cands };
            let c = c.with_instances(instances).map_err(violations)?;
            write_corpus(&io.output, &c)?;
            Ok(json!({"command": "gen-negatives", "output": io.output.display().to_string(), "candidates": n}))
        }
        Command::Split { io, seed } => {
            let c = load_corpus(&io.input, fmt)?;
            let c = split_corpus(c, *seed).map_err(violations)?;
            write_corpus(&io.output, &c)?;
            let tally = |t: SplitTag| c.splits().map_or(0, |s| s.values().filter(|&&v| v == t).count());
            Ok(json!({"command": "split", "output": io.output.display().to_string(), "seed": seed,
                      "train": tally(SplitTag::Train), "dev": tally(SplitTag::Dev), "test": tally(SplitTag::Test)}))
        }
        Command::BuildInputs { input, output, variant, max_tokens, split, skip_invalid } => {
            let c = select(load_corpus(input, fmt)?, *split)?;
            let variant: InputVariant = (*variant).into();
            let mut out = String::new();
            let (mut written, mut skipped, mut truncated) = (0usize, 0usize, 0usize);
            let mut errors = Vec::new();
            for (inst, d) in c.scored_pairs() {
                let built = build_input(variant, d, inst).and_then(|m| match max_tokens {
                    Some(b) => {
                        let t = truncate(&m, *b)?;
                        truncated += usize::from(t != m);
                        Ok(t)
                    }
                    None => Ok(m),
                });
                match built {
                    Ok(m) => {
                        let rec = json!({"dialogue_id": inst.dialogue_id, "instance_id": inst.instance_id,
                                         "variant": variant.as_str(), "text": m.text});
                        out.push_str(&rec.to_string());
                        out.push('\n');
                        written += 1;
                    }
                    Err(_) if *skip_invalid => skipped += 1,
                    Err(e) => errors.push(e.to_string()),
                }
            }
            if !errors.is_empty() {
                return Err(Failure::invalid(errors));
            }
            write_out(output, out.as_bytes())?;
            if skipped > 0 {
                eprintln!("skipped {skipped} instance(s) not buildable as {variant}");
            }
            Ok(json!({"command": "build-inputs", "output": output.display().to_string(), "variant": variant.as_str(),
                      "written": written, "skipped": skipped, "truncated": truncated}))
        }
        Command::Majority { train, predict, mode, output, train_split, predict_split } => {
            let train_c = select(load_corpus(train, fmt)?, *train_split)?;
            let pred_c = select(load_corpus(predict, fmt)?, *predict_split)?;
            let model = train_majority(&train_c).map_err(|e| Failure::invalid(vec![format!("{}: {e}", train.display())]))?;
            let mut buf = Vec::new();
            let n = match mode {
                Mode::Standard => {
                    let p = predict_standard(&model, &pred_c);
                    write_standard_predictions(&mut buf, &p).expect("in-memory write");
                    p.len()
                }
                Mode::Conversational => {
                    let p = predict_conversational(&model, &pred_c);
                    write_conversational_predictions(&mut buf, &p).expect("in-memory write");
                    p.len()
                }
            };
            write_out(output, &buf)?;
            Ok(json!({"command": "majority", "output": output.display().to_string(), "predictions": n,
                      "global_majority": model.global_majority.name(), "pairs": model.pair_table.len()}))
        }
        Command::Stats { input, output, csv_dir } => {
            let c = load_corpus(input, fmt)?;
            let s = summarize(&c);
            if let Some(dir) = csv_dir {
                std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
                write_out(&dir.join("distance_min.csv"), distance_histogram_csv(&s.distances.min_histogram).as_bytes())?;
                write_out(&dir.join("distance_avg.csv"), distance_histogram_csv(&s.distances.avg_histogram).as_bytes())?;
                write_out(&dir.join("relation_types.csv"), relation_histogram_csv(&s.relation_type_histogram).as_bytes())?;
            }
            let text = s.to_json();
            match output {
                Some(p) => write_out(p, text.as_bytes())?,
                None if !cli.json => print!("{text}"),
                None => {}
            }
            Ok(json!({"command": "stats", "summary": serde_json::to_value(&s).expect("summary serializes")}))
        }
        Command::Score(s) => score(fmt, s, false),
        Command::ScoreConversational(s) => score(fmt, s, true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                let mut report = report;
                if let Some(obj) = report.as_object_mut() {
                    obj.remove("table");
                }
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else if let Some(table) = report.get("table").and_then(Value::as_str) {
                print!("{table}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            for l in &f.lines {
                eprintln!("error: {l}");
            }
            if cli.json {
                let status = if f.code == 1 { "invalid" } else { "usage" };
                println!("{}", serde_json::to_string_pretty(&json!({"status": status, "errors": f.lines})).expect("serializes"));
            }
            ExitCode::from(f.code)
        }
    }
}
