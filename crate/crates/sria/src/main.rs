fn main() {
    std::process::exit(sria::cli::main_entry());
}
