//! Published tables, cell for cell as printed.
//!
//! Numeric cells are kept as strings so comparisons are against the printed
//! text, not against a re-rounded float.

pub const MODELS: [&str; 3] = ["CXR-MAE", "RAD-DINO", "ResNet50"];
pub const TASKS: [&str; 4] = ["Cardiomegaly", "Edema", "Pneumothorax", "Pleural Effusion"];

/// One split of the cohort table. Patients, studies and view counts are
/// transcribed for completeness; the toolkit works per image.
#[derive(Debug, Clone, Copy)]
pub struct SplitLine {
    pub split: &'static str,
    pub patients: usize,
    pub studies: usize,
    pub images: usize,
    pub pa: usize,
    pub ap: usize,
    pub age_mean: &'static str,
    pub age_sd: &'static str,
    pub female: &'static str,
    pub white: &'static str,
    pub black: &'static str,
    pub asian: &'static str,
    pub hispanic: &'static str,
    pub other: &'static str,
}

pub const COHORT_SPLITS: [SplitLine; 3] = [
    SplitLine {
        split: "Train",
        patients: 30_238,
        studies: 117_686,
        images: 131_283,
        pa: 47_650,
        ap: 83_633,
        age_mean: "61.9",
        age_sd: "16.8",
        female: "45.8",
        white: "66.6",
        black: "16.3",
        asian: "3.0",
        hispanic: "5.4",
        other: "8.8",
    },
    SplitLine {
        split: "Val",
        patients: 10_079,
        studies: 38_846,
        images: 43_335,
        pa: 15_619,
        ap: 27_716,
        age_mean: "62.4",
        age_sd: "16.8",
        female: "46.0",
        white: "67.1",
        black: "15.4",
        asian: "3.7",
        hispanic: "5.4",
        other: "8.4",
    },
    SplitLine {
        split: "Test",
        patients: 10_081,
        studies: 38_444,
        images: 42_918,
        pa: 15_815,
        ap: 27_103,
        age_mean: "61.3",
        age_sd: "17.1",
        female: "45.9",
        white: "65.5",
        black: "15.9",
        asian: "3.9",
        hispanic: "5.8",
        other: "9.0",
    },
];

/// Test-split prevalence in percent, one decimal.
pub const TEST_PREVALENCE: [(&str, &str); 4] = [
    ("Pneumothorax", "4.9"),
    ("Cardiomegaly", "20.4"),
    ("Pleural Effusion", "23.8"),
    ("Edema", "12.4"),
];

/// Per-group metrics: G1..G3 as Prec Rec AUC Rec(R) AUC(R), then G4 as
/// Prec Rec AUC.
#[derive(Debug, Clone, Copy)]
pub struct MetricsLine {
    pub task: &'static str,
    pub model: &'static str,
    pub cells: &'static str,
}

pub const GROUP_METRICS: [MetricsLine; 12] = [
    MetricsLine { task: "Cardiomegaly", model: "CXR-MAE", cells: "0.341 0.779 0.680 0.774 0.678 0.352 0.761 0.703 0.757 0.698 0.363 0.688 0.739 0.672 0.735 0.320 0.430 0.813" },
    MetricsLine { task: "Cardiomegaly", model: "RAD-DINO", cells: "0.381 0.781 0.735 0.778 0.733 0.392 0.793 0.756 0.783 0.753 0.398 0.747 0.784 0.739 0.782 0.360 0.556 0.851" },
    MetricsLine { task: "Cardiomegaly", model: "ResNet50", cells: "0.325 0.775 0.650 0.768 0.644 0.335 0.754 0.671 0.750 0.665 0.336 0.663 0.705 0.657 0.707 0.299 0.420 0.797" },
    MetricsLine { task: "Edema", model: "CXR-MAE", cells: "0.300 0.837 0.791 0.846 0.783 0.331 0.822 0.824 0.838 0.832 0.341 0.792 0.863 0.833 0.873 0.285 0.589 0.921" },
    MetricsLine { task: "Edema", model: "RAD-DINO", cells: "0.336 0.825 0.823 0.822 0.818 0.357 0.834 0.846 0.844 0.845 0.357 0.832 0.884 0.849 0.884 0.337 0.684 0.937" },
    MetricsLine { task: "Edema", model: "ResNet50", cells: "0.270 0.798 0.750 0.809 0.749 0.295 0.790 0.783 0.793 0.792 0.306 0.752 0.823 0.782 0.834 0.269 0.576 0.899" },
    MetricsLine { task: "Pneumothorax", model: "CXR-MAE", cells: "0.135 0.748 0.752 0.721 0.741 0.133 0.716 0.765 0.783 0.777 0.120 0.676 0.785 0.713 0.811 0.080 0.519 0.843" },
    MetricsLine { task: "Pneumothorax", model: "RAD-DINO", cells: "0.182 0.796 0.826 0.829 0.841 0.197 0.779 0.848 0.814 0.866 0.178 0.672 0.844 0.721 0.859 0.156 0.535 0.893" },
    MetricsLine { task: "Pneumothorax", model: "ResNet50", cells: "0.126 0.678 0.702 0.698 0.710 0.118 0.667 0.723 0.682 0.732 0.087 0.546 0.714 0.543 0.713 0.059 0.504 0.796" },
    MetricsLine { task: "Pleural Effusion", model: "CXR-MAE", cells: "0.494 0.831 0.768 0.834 0.768 0.509 0.809 0.803 0.805 0.799 0.509 0.744 0.846 0.750 0.839 0.455 0.553 0.885" },
    MetricsLine { task: "Pleural Effusion", model: "RAD-DINO", cells: "0.552 0.835 0.820 0.802 0.805 0.568 0.828 0.848 0.831 0.849 0.572 0.789 0.883 0.783 0.877 0.556 0.608 0.925" },
    MetricsLine { task: "Pleural Effusion", model: "ResNet50", cells: "0.458 0.796 0.717 0.793 0.709 0.466 0.781 0.756 0.779 0.750 0.456 0.722 0.800 0.719 0.795 0.333 0.485 0.844" },
];

/// Mean confidence, Ovr Pos Neg for each of G1..G4. The confidence table
/// prints the RAD-DINO model as "Rad-Dino"; names here follow the metrics
/// table.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceLine {
    pub task: &'static str,
    pub model: &'static str,
    pub cells: &'static str,
}

pub const GROUP_CONFIDENCE: [ConfidenceLine; 12] = [
    ConfidenceLine { task: "Cardiomegaly", model: "CXR-MAE", cells: "0.674 0.684 0.670 0.675 0.678 0.675 0.692 0.662 0.701 0.784 0.671 0.795" },
    ConfidenceLine { task: "Cardiomegaly", model: "RAD-DINO", cells: "0.693 0.710 0.688 0.708 0.715 0.705 0.728 0.708 0.733 0.828 0.713 0.839" },
    ConfidenceLine { task: "Cardiomegaly", model: "ResNet50", cells: "0.660 0.668 0.658 0.666 0.666 0.666 0.687 0.660 0.695 0.787 0.677 0.797" },
    ConfidenceLine { task: "Edema", model: "CXR-MAE", cells: "0.755 0.772 0.751 0.762 0.768 0.761 0.791 0.754 0.796 0.892 0.736 0.897" },
    ConfidenceLine { task: "Edema", model: "RAD-DINO", cells: "0.770 0.780 0.767 0.789 0.795 0.788 0.819 0.796 0.823 0.915 0.784 0.920" },
    ConfidenceLine { task: "Edema", model: "ResNet50", cells: "0.738 0.749 0.735 0.747 0.750 0.746 0.779 0.732 0.786 0.889 0.738 0.894" },
    ConfidenceLine { task: "Pneumothorax", model: "CXR-MAE", cells: "0.726 0.764 0.723 0.730 0.743 0.729 0.759 0.736 0.760 0.833 0.712 0.834" },
    ConfidenceLine { task: "Pneumothorax", model: "RAD-DINO", cells: "0.770 0.819 0.766 0.789 0.827 0.787 0.820 0.795 0.821 0.900 0.781 0.902" },
    ConfidenceLine { task: "Pneumothorax", model: "ResNet50", cells: "0.736 0.745 0.736 0.740 0.742 0.739 0.767 0.734 0.768 0.838 0.757 0.839" },
    ConfidenceLine { task: "Pleural Effusion", model: "CXR-MAE", cells: "0.749 0.771 0.738 0.750 0.755 0.748 0.773 0.747 0.781 0.867 0.744 0.875" },
    ConfidenceLine { task: "Pleural Effusion", model: "RAD-DINO", cells: "0.770 0.790 0.760 0.785 0.801 0.778 0.817 0.795 0.823 0.906 0.781 0.915" },
    ConfidenceLine { task: "Pleural Effusion", model: "ResNet50", cells: "0.724 0.737 0.718 0.728 0.732 0.727 0.750 0.722 0.758 0.851 0.729 0.859" },
];

/// Demographics of the test-set groups. Asian and Other/Unknown shares are
/// not printed.
#[derive(Debug, Clone, Copy)]
pub struct DemographicsTable {
    pub n: [usize; 4],
    pub age: [&'static str; 4],
    pub female: [&'static str; 4],
    pub white: [&'static str; 4],
    pub black: [&'static str; 4],
    pub hispanic: [&'static str; 4],
    /// G4 minus G1: age, female, white, black, hispanic.
    pub delta: [&'static str; 5],
}

pub const GROUP_DEMOGRAPHICS: DemographicsTable = DemographicsTable {
    n: [10_415, 10_768, 10_781, 10_954],
    age: ["64.83", "64.11", "62.38", "53.90"],
    female: ["47.45", "43.95", "43.76", "48.40"],
    white: ["67.33", "66.50", "66.37", "61.66"],
    black: ["14.05", "13.51", "15.82", "20.07"],
    hispanic: ["4.04", "4.81", "5.29", "8.97"],
    delta: ["-10.93", "+0.95", "-5.67", "+6.02", "+4.93"],
};

pub fn cells(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

pub fn num(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("fixture cell {cell:?} is not a number"))
}

pub fn metrics_line(task: &str, model: &str) -> &'static MetricsLine {
    GROUP_METRICS
        .iter()
        .find(|l| l.task == task && l.model == model)
        .unwrap_or_else(|| panic!("no metrics line for {task}/{model}"))
}

pub fn confidence_line(task: &str, model: &str) -> &'static ConfidenceLine {
    GROUP_CONFIDENCE
        .iter()
        .find(|l| l.task == task && l.model == model)
        .unwrap_or_else(|| panic!("no confidence line for {task}/{model}"))
}

pub fn test_prevalence(task: &str) -> &'static str {
    TEST_PREVALENCE.iter().find(|(t, _)| *t == task).map(|(_, p)| *p).unwrap()
}
