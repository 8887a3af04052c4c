use clap::{Args, Parser, Subcommand};
use irlink::cli::{
    self, parse_scheme_kind, parse_sweep, CliError, SchemeSpec, SimulateConfig,
};
use irlink::optics::NlosGeometry;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "irlink", version, about = "IR-LED to camera link simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    /// Modulation scheme: ook, bfsk or ask.
    #[arg(long)]
    scheme: String,
    /// Nominal bit rate in bit/s.
    #[arg(long)]
    rate: f64,
    /// Number of transmitter intensity levels.
    #[arg(long, default_value_t = 5)]
    levels: usize,
}

impl SchemeArgs {
    fn to_spec(&self) -> Result<SchemeSpec, CliError> {
        Ok(SchemeSpec {
            kind: parse_scheme_kind(&self.scheme)?,
            rate_bps: self.rate,
            n_levels: self.levels,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Frame and encode a file into a level,duration timeline.
    Encode {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// File to transmit.
        #[arg(long)]
        input: PathBuf,
        /// Timeline output path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Sweep bit rates through the simulated channel and report BER.
    Simulate {
        /// Modulation scheme: ook, bfsk or ask.
        #[arg(long)]
        scheme: String,
        /// Receiving camera frame rate.
        #[arg(long)]
        fps: f64,
        /// RNG seed; required so every run is reproducible.
        #[arg(long)]
        seed: u64,
        /// LED transition time in milliseconds.
        #[arg(long, default_value_t = 50.0)]
        transition: f64,
        /// Rate sweep as start:stop:count.
        #[arg(long, default_value = "1:50:50")]
        rates: String,
        /// Receiver noise in normalized brightness units.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Payload frames per sweep point.
        #[arg(long, default_value_t = 3)]
        frames: usize,
        /// Jammer blink rate in Hz (requires --jam-amplitude).
        #[arg(long)]
        jam_rate: Option<f64>,
        /// Jammer amplitude in normalized brightness.
        #[arg(long)]
        jam_amplitude: Option<f64>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-distance tables and diffuse-reflection budgets.
    Linkbudget {
        /// Link parameter file; reference values when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Irradiance-angle sweep start:stop:count in degrees.
        #[arg(long)]
        phi: Option<String>,
        /// Detector-angle sweep start:stop:count in degrees.
        #[arg(long)]
        varphi: Option<String>,
        /// Evaluate the reflection path instead of line of sight.
        #[arg(long)]
        nlos: bool,
        #[arg(long, default_value_t = 5.0)]
        d1: f64,
        #[arg(long, default_value_t = 10.0)]
        d2: f64,
        #[arg(long, default_value_t = 45.0)]
        alpha: f64,
        #[arg(long, default_value_t = 45.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Reflecting patch edge length in meters.
        #[arg(long, default_value_t = 4.0)]
        patch: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a recorded frame directory.
    Decode {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Directory with manifest.txt and raw frames.
        #[arg(long)]
        frames: PathBuf,
        /// Original file to compare against for a BER figure.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Run the emulated camera until interrupted.
    Serve {
        /// Flat key-value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        /// Basic-auth credential as user:pass.
        #[arg(long)]
        auth: Option<String>,
        #[arg(long)]
        fps: Option<f64>,
        /// LED blob as x,y,w,h.
        #[arg(long)]
        blob: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Transmit a file to a running emulator.
    Transmit {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Camera address as host:port.
        #[arg(long)]
        addr: String,
        /// File to transmit.
        #[arg(long)]
        file: PathBuf,
        /// Basic-auth credential as user:pass.
        #[arg(long)]
        auth: Option<String>,
        /// Post-data hold in milliseconds.
        #[arg(long, default_value_t = 150.0)]
        tail: f64,
    },
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Encode { scheme, input, output } => {
            let summary = cli::cmd_encode(&input, scheme.to_spec()?, &output)?;
            print!("{summary}");
            Ok(())
        }
        Command::Simulate {
            scheme,
            fps,
            seed,
            transition,
            rates,
            sigma,
            levels,
            frames,
            jam_rate,
            jam_amplitude,
            out,
        } => {
            let mut cfg = SimulateConfig::new(parse_scheme_kind(&scheme)?, fps, seed);
            cfg.transition_ms = transition;
            cfg.rates_bps = parse_sweep(&rates)?;
            cfg.sigma_norm = sigma;
            cfg.n_levels = levels;
            cfg.frames_per_point = frames;
            cfg.jammer = match (jam_rate, jam_amplitude) {
                (Some(rate), Some(amplitude)) => Some((rate, amplitude)),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--jam-rate and --jam-amplitude go together".into(),
                    ))
                }
            };
            let outcome = cli::cmd_simulate(&cfg)?;
            write_or_print(&outcome.csv, out.as_ref())?;
            match outcome.max_zero_ber_rate {
                Some(rate) => println!("max_zero_ber_rate={rate}"),
                None => println!("max_zero_ber_rate=none"),
            }
            Ok(())
        }
        Command::Linkbudget {
            params,
            phi,
            varphi,
            nlos,
            d1,
            d2,
            alpha,
            beta,
            rho,
            patch,
            grid,
            out,
        } => {
            let link = cli::load_link_params(params.as_deref())?;
            if nlos {
                let geometry = NlosGeometry {
                    d1_m: d1,
                    d2_m: d2,
                    incidence_angle_deg: alpha,
                    reflection_angle_deg: beta,
                    reflectance: rho,
                    patch_width_m: patch,
                    patch_height_m: patch,
                    grid,
                };
                let csv = cli::cmd_linkbudget_nlos(&link, &geometry)?;
                write_or_print(&csv, out.as_ref())
            } else {
                let phi_sweep = phi.as_deref().map(parse_sweep).transpose()?.unwrap_or_default();
                let varphi_sweep =
                    varphi.as_deref().map(parse_sweep).transpose()?.unwrap_or_default();
                let csv = cli::cmd_linkbudget_los(&link, &phi_sweep, &varphi_sweep)?;
                write_or_print(&csv, out.as_ref())?;
                print!("{}", cli::linkbudget_summary(&link)?);
                Ok(())
            }
        }
        Command::Decode { scheme, frames, expect } => {
            let report = cli::cmd_decode(&frames, scheme.to_spec()?, expect.as_deref())?;
            print!("{report}");
            Ok(())
        }
        Command::Serve { config, listen, levels, auth, fps, blob, seed } => {
            let mut camera = match config {
                Some(path) => cli::parse_camera_config(&std::fs::read_to_string(path)?)?,
                None => Default::default(),
            };
            if let Some(listen) = listen {
                camera.listen = listen;
            }
            if let Some(levels) = levels {
                camera.n_levels = levels;
            }
            if let Some(auth) = auth {
                camera.auth = Some(auth);
            }
            if let Some(fps) = fps {
                camera.fps = fps;
            }
            if let Some(blob) = blob {
                camera.blob = cli::parse_blob(&blob)?;
            }
            if let Some(seed) = seed {
                camera.render_seed = seed;
            }
            cli::cmd_serve(camera)
        }
        Command::Transmit { scheme, addr, file, auth, tail } => {
            let summary = cli::cmd_transmit(&addr, scheme.to_spec()?, &file, auth, tail)?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() {
    if let Err(error) = run() {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
