fn main() {
    std::process::exit(cat_sched::cli::run(std::env::args_os()));
}
