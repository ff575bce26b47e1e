// Temporary hyper-parameter probe; not part of the deliverable.

use std::time::Instant;

use skillnet_core::mlp::{
    detection_sign_accuracy, localisation_exact_match_rate, train, TrainConfig,
};
use skillnet_core::skills::SkillKind;
use skillnet_core::trainset::{build_training_set, TaskMode};
#[allow(unused_imports)]
use skillnet_core::encoding::UnitEncoding;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let max_epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(500);
    let patience: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(25);
    let hidden: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(32);
    let mode = match args.get(5).map(String::as_str) {
        Some("loc") => TaskMode::Localisation,
        _ => TaskMode::Detection,
    };
    let init_scale: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.1);

    if args.get(1).map(String::as_str) == Some("dump") {
        for kind in SkillKind::ALL {
            for mode in TaskMode::ALL {
                let set = build_training_set(kind, mode, 42).unwrap();
                let path = format!("/tmp/{}-{}.trainset", mode.name(), kind.name());
                set.save(std::path::Path::new(&path)).unwrap();
                println!("wrote {path}");
            }
        }
        return;
    }

    println!(
        "lr={lr} max_epochs={max_epochs} patience={patience} hidden={hidden} mode={mode} init={init_scale}"
    );
    for kind in SkillKind::ALL {
        let t0 = Instant::now();
        let set = build_training_set(kind, mode, 42).unwrap();
        let gen_time = t0.elapsed();
        let config = TrainConfig {
            hidden_width: hidden,
            learning_rate: lr,
            max_epochs,
            patience,
            init_scale,
            seed: 42,
        };
        let t1 = Instant::now();
        let (net, trace) = train(&set, &config).unwrap();
        let train_time = t1.elapsed();
        let split = set.split();
        match mode {
            TaskMode::Detection => {
                let train_acc = detection_sign_accuracy(&net, &set, &split.train).unwrap();
                let test_acc = detection_sign_accuracy(&net, &set, &split.test).unwrap();
                println!(
                    "{kind:<14} gen {gen_time:>8.2?} train {train_time:>8.2?} epochs {:>4} best@{:>4} val_mse {:.4} | train_acc {:.4} test_acc {:.4}",
                    trace.epochs.len(), trace.best_epoch, trace.best_validation_mse, train_acc, test_acc
                );
            }
            TaskMode::Localisation => {
                let test_exact = localisation_exact_match_rate(&net, &set, &split.test).unwrap();
                let positives: Vec<usize> = split
                    .test
                    .iter()
                    .copied()
                    .filter(|&i| set.is_positive(i))
                    .collect();
                let pos_exact = localisation_exact_match_rate(&net, &set, &positives).unwrap();
                println!(
                    "{kind:<14} gen {gen_time:>8.2?} train {train_time:>8.2?} epochs {:>4} best@{:>4} val_mse {:.4} | test_exact {:.4} pos_exact {:.4}",
                    trace.epochs.len(), trace.best_epoch, trace.best_validation_mse, test_exact, pos_exact
                );
            }
        }
    }
}
