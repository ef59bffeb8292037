use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use multitone::report::OutputDocument;
use multitone::{
    decompose_with_observer, dft, synthesize, DecompositionConfig, HalfSpectrum, Mode, NoiseSpec, RefineConfig,
    Signal, Tone,
};

mod input;
mod output;

use input::InputDocument;

const EXIT_ARGS: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_DECOMPOSE: u8 = 4;

/// Estimate frequencies, amplitudes and phases of the sinusoids in a sample
/// sequence.
#[derive(Debug, Parser)]
#[command(name = "multitone", version)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "synth"])))]
#[command(group(ArgGroup::new("order").args(["tones", "blind"])))]
struct Args {
    /// Sample file: one value per line, `#` comments, optional `# sample_rate=<Hz>`.
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,

    /// Built-in test signal instead of an input file.
    #[arg(long, value_enum, value_name = "PRESET")]
    synth: Option<Preset>,

    /// Extract exactly this many tones.
    #[arg(long, value_name = "M")]
    tones: Option<usize>,

    /// Extract until the residual energy threshold or the tone cap is hit (default).
    #[arg(long)]
    blind: bool,

    /// Refinement resolution as a fraction of one DFT bin.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,

    /// Blind-mode tone cap.
    #[arg(long, value_name = "M0", default_value_t = 32)]
    max_tones: usize,

    /// Blind mode stops once residual energy is at most this fraction of the input energy.
    #[arg(long, value_name = "TAU", default_value_t = 1e-3)]
    residual_threshold: f64,

    /// Write (iteration, frequency, magnitude) rows of every analysed spectrum as CSV.
    #[arg(long, value_name = "PATH")]
    dump_spectrum: Option<PathBuf>,

    /// Write the result document here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Noise seed for --synth.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Noise standard deviation for --synth.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// 1024 samples, one tone at bin 100.37.
    SingleTone,
    /// 4096 samples, tones at bins 80.21, 160.68 and 411.33.
    ThreeTone,
}

impl Preset {
    fn scene(self) -> (usize, Vec<Tone>) {
        let at = |n: usize, bin: f64| 2.0 * PI * bin / n as f64;
        match self {
            Preset::SingleTone => (1024, vec![Tone::new(at(1024, 100.37), 1.0, 0.6)]),
            Preset::ThreeTone => (
                4096,
                vec![
                    Tone::new(at(4096, 80.21), 1.0, 0.3),
                    Tone::new(at(4096, 160.68), 0.7, -1.1),
                    Tone::new(at(4096, 411.33), 0.4, 2.0),
                ],
            ),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Preset::SingleTone => "single-tone",
            Preset::ThreeTone => "three-tone",
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ARGS)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("multitone: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn config(args: &Args) -> Result<DecompositionConfig, Failure> {
    let mode = args.tones.map_or(Mode::Blind, Mode::Known);
    let cfg = DecompositionConfig {
        mode,
        refine: RefineConfig::new(args.epsilon),
        max_tones: match mode {
            Mode::Known(m) => args.max_tones.max(m),
            Mode::Blind => args.max_tones,
        },
        residual_energy_fraction: args.residual_threshold,
        min_bin_separation: 0,
    };
    cfg.validate().map_err(|e| Failure::new(EXIT_ARGS, e))?;
    Ok(cfg)
}

fn load(args: &Args) -> Result<(Signal, Option<f64>, String), Failure> {
    if let Some(path) = &args.input {
        let doc = InputDocument::read(path).map_err(|e| Failure::new(EXIT_INPUT, e))?;
        return Ok((doc.signal(), doc.sample_rate, doc.source_path));
    }
    let preset = args.synth.expect("clap enforces one source");
    let (n, tones) = preset.scene();
    let noise = NoiseSpec::new(args.noise_std, args.seed);
    let x = synthesize(&tones, n, noise).map_err(|e| Failure::new(EXIT_ARGS, e))?;
    Ok((x, None, format!("synth:{}", preset.name())))
}

fn run(args: &Args) -> Result<(), Failure> {
    let cfg = config(args)?;
    let (x, sample_rate, source) = load(args)?;

    let mut dump = String::new();
    let wants_dump = args.dump_spectrum.is_some();
    if wants_dump {
        dump.push_str("iteration,frequency_rad_per_sample,magnitude\n");
    }
    let result = decompose_with_observer(&x, &cfg, |i, spec| {
        if wants_dump {
            append_spectrum(&mut dump, i, spec);
        }
    })
    .map_err(|e| Failure::new(EXIT_DECOMPOSE, e))?;
    if wants_dump {
        append_spectrum(&mut dump, result.diagnostics.len(), &dft(&result.residual));
    }

    let doc = OutputDocument::new(&result, &cfg, sample_rate, source);
    let text = output::to_json(&doc).map_err(|e| Failure::new(EXIT_DECOMPOSE, e))?;

    if let Some(path) = &args.dump_spectrum {
        fs::write(path, dump).map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))?;
    }
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn append_spectrum(out: &mut String, iteration: usize, spec: &HalfSpectrum) {
    for (w, mag) in spec.magnitudes() {
        let _ = writeln!(out, "{iteration},{},{}", output::format_f64(w), output::format_f64(mag));
    }
}
