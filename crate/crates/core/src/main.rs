fn main() {
    let status = subset_posterior::cli::run(std::env::args_os());
    std::process::exit(status.code);
}
