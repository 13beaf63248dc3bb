fn main() {
    std::process::exit(dicke_crit::cli::main_with_args(std::env::args_os().collect()));
}
