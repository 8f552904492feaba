mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use beads_core::io::{emit, Table};
use beads_core::{Error, Result};
use clap::Parser;

use args::{Cli, Command, Output};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Accuracy { .. } => 4,
        Error::Io { .. } => 5,
        Error::Domain(_)
        | Error::Invalid(_)
        | Error::Indeterminate(_)
        | Error::TooLarge { .. }
        | Error::Parse { .. } => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    use commands as c;
    let (table, output): (Table, &Output) = match &cli.command {
        Command::Kernel(a) => (c::kernel(a)?, &a.output),
        Command::DiscreteKernel(a) => (c::discrete_kernel(a)?, &a.output),
        Command::Verify(a) => (c::verify(a)?, &a.output),
        Command::Correlate(a) => (c::correlate(a)?, &a.output),
        Command::Gap(a) => (c::gap(a)?, &a.output),
        Command::Counts(a) => (c::counts(a)?, &a.output),
        Command::SampleDpp(a) => (c::sample_dpp(a)?, &a.output),
        Command::SampleMcmc(a) => (c::sample_mcmc(a)?, &a.output),
        Command::Charpoly(a) => (c::charpoly(a)?, &a.output),
        Command::Newton(a) => (c::newton(a)?, &a.output),
        Command::Amoeba(a) => {
            let (t, tentacles) = c::amoeba(a)?;
            let _ = writeln!(std::io::stderr(), "tentacles crossing the raster boundary: {tentacles}");
            (t, &a.output)
        }
        Command::Ronkin(a) => (c::ronkin(a)?, &a.output),
        Command::Tentacle(a) => (c::tentacle_cmd(a)?, &a.side.output),
        Command::Rho(a) => (c::rho(a)?, &a.output),
        Command::Rank1(a) => (c::rank1(a)?, &a.side.output),
        Command::Isoradial(a) => (c::isoradial(a)?, &a.side.output),
        Command::Freeze(a) => (c::freeze(a)?, &a.output),
        Command::Runlength(a) => (c::runlength(a)?, &a.output),
        Command::TentacleCheck(a) => (c::tentacle_check(a)?, &a.side.output),
    };
    emit(&table, output.format, output.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
