fn main() {
    std::process::exit(smote_ga_rf::cli::main());
}
