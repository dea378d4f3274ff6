fn main() {
    std::process::exit(prepllab_cli::app::run(std::env::args_os()));
}
