fn main() {
    std::process::exit(monisum::cli::dispatch(std::env::args_os()));
}
