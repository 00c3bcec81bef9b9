fn main() {
    std::process::exit(trace_rel_cli::run(std::env::args_os()));
}
