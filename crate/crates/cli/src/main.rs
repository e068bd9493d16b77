fn main() {
    std::process::exit(condlim_cli::run(std::env::args_os()));
}
