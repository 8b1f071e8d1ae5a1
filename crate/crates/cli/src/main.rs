fn main() {
    std::process::exit(qfin_cli::run(std::env::args_os()));
}
