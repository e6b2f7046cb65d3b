use std::io;

fn main() {
    let code = prolog_card::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
