fn main() {
    std::process::exit(uav_qoe::cli::main_with(std::env::args_os()));
}
