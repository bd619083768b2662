//! The `rnlu` command line: train, predict, eval, chat and ner.
//!
//! Results go to standard output as tab-separated fields; warnings and errors
//! go to the error stream. Exit status is 0 on success, 1 on any reported
//! error and 2 on bad usage.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{load_model, save_model, Hyperparams};
use crate::corpus::{
    parse_answers_for, parse_corpus, parse_dictionary, AnswerTable, Corpus, GazetteerEntry,
    DEFAULT_PREFIX,
};
use crate::error::{NluError, Result};
use crate::eval::{run_folds, SplitConfig};
use crate::gazetteer::{Automaton, Binding};
use crate::pipeline::{merge_answers, Pipeline, Prediction, Recognizer};

#[derive(Debug, Parser)]
#[command(
    name = "rnlu",
    version,
    about = "Train and query a paraphrase-based intent classifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a corpus and write the model file.
    Train(TrainArgs),
    /// Classify one utterance and print category, margin, bindings and answer.
    Predict(PredictArgs),
    /// Run the repeated 70/30 evaluation protocol.
    Eval(EvalArgs),
    /// Interactive session: one answer per input line.
    Chat(ServeArgs),
    /// Tag dictionary entities in a text.
    Ner(NerArgs),
}

#[derive(Debug, Args)]
pub struct TrainingFlags {
    /// Regularization strength.
    #[arg(long, default_value_t = Hyperparams::default().lambda)]
    pub lambda: f64,
    /// Passes over the training data.
    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Dictionary of `TAG w1 ... wn` lines; enables entity tagging.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// `category answer` lines overriding the corpus answers.
    #[arg(long)]
    pub answers: Option<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    /// Seed for the training shuffle.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = DEFAULT_PREFIX)]
    pub prefix: String,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Corpus whose `<answers>` supply the responses.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub answers: Option<PathBuf>,
    /// Must be the dictionary the model was trained with.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Seed for answer selection.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = DEFAULT_PREFIX)]
    pub prefix: String,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub serve: ServeArgs,
    pub utterance: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Seed of the first fold; fold i uses seed + i. Also seeds training.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value = DEFAULT_PREFIX)]
    pub prefix: String,
    /// Where to write the `fold_i accuracy` / `average` report.
    #[arg(long, default_value = "eval_report.txt")]
    pub report: PathBuf,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct NerArgs {
    #[arg(long)]
    pub dictionary: PathBuf,
    pub text: String,
}

/// Standard streams of one invocation.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => NluError::Io(io::Error::new(
            e.kind(),
            format!("no such file: {}", path.display()),
        )),
        _ => NluError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
    })
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    parse_corpus(&read_file(path)?)
}

fn load_dictionary(path: Option<&Path>) -> Result<Option<Vec<GazetteerEntry>>> {
    path.map(|p| read_file(p).and_then(|t| parse_dictionary(&t)))
        .transpose()
}

fn hyperparams(flags: &TrainingFlags, seed: u64) -> Result<Hyperparams> {
    let hp = Hyperparams {
        lambda: flags.lambda,
        epochs: flags.epochs,
        seed,
    };
    hp.validate()?;
    Ok(hp)
}

/// `TAG=surface` pairs joined by `;`, or `-` when there are none.
pub fn format_bindings(bindings: &[Binding]) -> String {
    if bindings.is_empty() {
        return "-".into();
    }
    bindings
        .iter()
        .map(|b| format!("{}={}", b.tag, b.surface))
        .collect::<Vec<_>>()
        .join(";")
}

fn format_margin(margin: f64) -> String {
    if margin.is_infinite() {
        "inf".into()
    } else {
        format!("{margin:.4}")
    }
}

fn flag(pred: &Prediction) -> &'static str {
    if pred.no_known_tokens {
        "no-known-tokens"
    } else {
        "ok"
    }
}

pub fn cmd_train(args: &TrainArgs, io: &mut Io) -> Result<()> {
    let hp = hyperparams(&args.training, args.seed)?;
    let corpus = load_corpus(&args.corpus)?;
    let dictionary = load_dictionary(args.dictionary.as_deref())?;
    let answers = args
        .answers
        .as_deref()
        .map(|p| read_file(p).and_then(|t| parse_answers_for(&t, &corpus.categories(&args.prefix))))
        .transpose()?;
    if corpus.len() == 1 {
        writeln!(
            io.stderr,
            "warning: a single interaction gives a constant classifier"
        )?;
    }
    let pipeline = Pipeline::train(&corpus, dictionary.as_deref(), answers, &hp, &args.prefix)?;
    let accuracy = pipeline
        .recognizer()
        .accuracy(&corpus.assign_categories(&args.prefix))?;
    let file = fs::File::create(&args.model)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", args.model.display())))?;
    save_model(pipeline.model(), io::BufWriter::new(file))?;
    writeln!(
        io.stdout,
        "vocabulary\t{}",
        pipeline.model().vocabulary().len()
    )?;
    writeln!(
        io.stdout,
        "categories\t{}",
        pipeline.model().categories().len()
    )?;
    writeln!(io.stdout, "training_accuracy\t{accuracy:.4}")?;
    Ok(())
}

fn load_pipeline(args: &ServeArgs) -> Result<Pipeline> {
    let bytes = fs::read(&args.model).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => {
            io::Error::new(e.kind(), format!("no such file: {}", args.model.display()))
        }
        _ => e,
    })?;
    let model = load_model(bytes.as_slice())?;
    let dictionary = load_dictionary(args.dictionary.as_deref())?;
    let recognizer = Recognizer::from_parts(model, dictionary.as_deref())?;
    let categories = recognizer.model().categories().to_vec();
    let file_answers = args
        .answers
        .as_deref()
        .map(|p| read_file(p).and_then(|t| parse_answers_for(&t, &categories)))
        .transpose()?;
    let table = match (&args.corpus, file_answers) {
        (Some(path), file) => merge_answers(&load_corpus(path)?, file, &args.prefix),
        (None, Some(file)) => file,
        (None, None) => AnswerTable::default(),
    };
    Pipeline::assemble(recognizer, &table, &args.prefix)
}

pub fn cmd_predict(args: &PredictArgs, io: &mut Io) -> Result<()> {
    let pipeline = load_pipeline(&args.serve)?;
    let pred = pipeline.understand(&args.utterance)?;
    if pred.no_known_tokens {
        writeln!(
            io.stderr,
            "warning: no known tokens; category chosen from biases only"
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.serve.seed);
    let response = pipeline.select_answer(&pred, &mut rng);
    writeln!(
        io.stdout,
        "{}\t{}\t{}\t{}\t{}",
        pred.category,
        format_margin(pred.margin),
        format_bindings(&pred.bindings),
        response,
        flag(&pred)
    )?;
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs, io: &mut Io) -> Result<()> {
    let hp = hyperparams(&args.training, args.seed)?;
    let cfg = SplitConfig::new(args.train_ratio, args.folds, args.seed);
    cfg.validate()?;
    let corpus = load_corpus(&args.corpus)?;
    let dictionary = load_dictionary(args.dictionary.as_deref())?;
    let report = run_folds(&corpus, dictionary.as_deref(), &hp, &cfg, &args.prefix)?;
    let name = args
        .corpus
        .file_stem()
        .map_or("corpus".into(), |s| s.to_string_lossy());
    write!(io.stdout, "{}", report.to_table(&name))?;
    if !report.misclassified.is_empty() {
        writeln!(
            io.stdout,
            "# misclassified: fold, gold, predicted, utterance"
        )?;
        write!(io.stdout, "{}", report.misclassification_report())?;
    }
    fs::write(&args.report, report.to_key_values())
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", args.report.display())))?;
    Ok(())
}

pub fn cmd_chat(args: &ServeArgs, io: &mut Io) -> Result<()> {
    let pipeline = load_pipeline(args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut debug = false;
    let mut line = String::new();
    loop {
        line.clear();
        if io.stdin.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let input = line.trim();
        match input {
            "" => continue,
            ":quit" => return Ok(()),
            ":debug" => {
                debug = !debug;
                writeln!(io.stderr, "debug {}", if debug { "on" } else { "off" })?;
                continue;
            }
            cmd if cmd.starts_with(':') => {
                writeln!(
                    io.stderr,
                    "warning: unknown command `{cmd}` (try :debug or :quit)"
                )?;
                continue;
            }
            _ => {}
        }
        match pipeline.understand(input) {
            Ok(pred) => {
                if debug {
                    let scores: Vec<String> = pipeline
                        .model()
                        .categories()
                        .iter()
                        .zip(pred.scores.as_slice())
                        .map(|(c, s)| format!("{c}={s:.4}"))
                        .collect();
                    writeln!(
                        io.stdout,
                        "# {}\t{}\t{}\t{}\t{}",
                        pred.category,
                        format_margin(pred.margin),
                        format_bindings(&pred.bindings),
                        flag(&pred),
                        scores.join(" ")
                    )?;
                }
                writeln!(io.stdout, "{}", pipeline.select_answer(&pred, &mut rng))?;
            }
            Err(e) => writeln!(io.stderr, "error: {e}")?,
        }
    }
}

pub fn cmd_ner(args: &NerArgs, io: &mut Io) -> Result<()> {
    let entries = parse_dictionary(&read_file(&args.dictionary)?)?;
    let tagged = Automaton::new(&entries).tag_text(&args.text);
    writeln!(io.stdout, "{}", tagged.rendered)?;
    for m in &tagged.matches {
        writeln!(
            io.stdout,
            "{}\t{}\t{}\t{}",
            m.tag, m.surface, m.start, m.end
        )?;
    }
    Ok(())
}

pub fn execute(cli: &Cli, io: &mut Io) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a, io),
        Command::Predict(a) => cmd_predict(a, io),
        Command::Eval(a) => cmd_eval(a, io),
        Command::Chat(a) => cmd_chat(a, io),
        Command::Ner(a) => cmd_ner(a, io),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            1
        }
    }
}
