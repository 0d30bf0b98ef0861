use std::io;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sharedcanvas_cli::cmd::{self, AlignArgs, FlattenArgs, Format};

#[derive(Parser)]
#[command(name = "sc", version, about = "Validate, flatten, align and serve canvas layout graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Scx,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Check the merged graph; exit 1 on errors (or any finding with --strict).
    Validate {
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        allow_remote: bool,
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Print one canvas's painted layout.
    Flatten {
        #[arg(long)]
        canvas: String,
        #[arg(long)]
        sequence: Option<String>,
        /// choice=option, repeatable.
        #[arg(long)]
        select: Vec<String>,
        #[arg(long, value_enum, default_value = "scx")]
        format: FormatArg,
        #[arg(long)]
        allow_remote: bool,
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// List annotations overlapping a region, grouped by layer.
    Align {
        #[arg(long)]
        canvas: String,
        /// "x,y,w,h" or an SVG path.
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        #[arg(long, default_value_t = 0.0)]
        min_fraction: f64,
        #[arg(long)]
        select: Vec<String>,
        #[arg(long)]
        allow_remote: bool,
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Serve the merged graph read-only over HTTP on localhost.
    Serve {
        #[arg(long, default_value_t = cmd::DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        allow_remote: bool,
        #[arg(required = true)]
        paths: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr());
    let status = match &cli.command {
        Command::Validate {
            strict,
            allow_remote,
            paths,
        } => cmd::validate(paths, *strict, *allow_remote, &mut out),
        Command::Flatten {
            canvas,
            sequence,
            select,
            format,
            allow_remote,
            paths,
        } => cmd::flatten(
            &FlattenArgs {
                paths,
                canvas,
                sequence: sequence.as_deref(),
                select,
                format: match format {
                    FormatArg::Scx => Format::Scx,
                    FormatArg::Svg => Format::Svg,
                },
                allow_remote: *allow_remote,
            },
            &mut out,
            &mut err,
        ),
        Command::Align {
            canvas,
            region,
            min_fraction,
            select,
            allow_remote,
            paths,
        } => cmd::align(
            &AlignArgs {
                paths,
                canvas,
                region,
                min_fraction: *min_fraction,
                select,
                allow_remote: *allow_remote,
            },
            &mut out,
            &mut err,
        ),
        Command::Serve {
            port,
            allow_remote,
            paths,
        } => cmd::serve(paths, *port, *allow_remote, &mut err),
    };
    ExitCode::from(status as u8)
}
