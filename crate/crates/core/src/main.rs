// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(gaussdyn::cli::main_with_args(std::env::args_os()));
}
