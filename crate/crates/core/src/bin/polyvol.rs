fn main() {
    let code = polyvol::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
