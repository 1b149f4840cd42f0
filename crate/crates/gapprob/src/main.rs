fn main() {
    std::process::exit(gapprob::cli::main_with(std::env::args_os()));
}
