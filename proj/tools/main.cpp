#include <CLI11.hpp>

#include "invctl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Inverter control toolkit: expert MPC, imitation training, and evaluation"};
    app.require_subcommand(1);
    int rc = invctl::kExitOk;

    invctl::CollectCli collect;
    CLI::App* c = app.add_subcommand("collect", "Run the expert over a scenario grid and record a dataset");
    c->add_option("--scenarios", collect.scenarios_path, "Scenario JSON file")->required();
    c->add_option("--output", collect.output_csv, "Dataset CSV to write")->required();
    c->add_option("--manifest", collect.manifest_path, "Manifest path (default <output>.manifest.json)");
    c->add_option("--substeps", collect.substeps, "Integrator substeps per control period");
    c->add_flag("--keep-going", collect.keep_going, "Skip scenarios that fail instead of aborting");
    c->add_flag("--advance-reference", collect.advance_reference, "Track the one-period-ahead reference");
    c->callback([&] { rc = invctl::cmd_collect(collect); });

    invctl::TrainCli train;
    CLI::App* t = app.add_subcommand("train", "Train the student network on a collected dataset");
    t->add_option("--dataset", train.dataset_path, "Dataset CSV")->required();
    t->add_option("--model", train.model_path, "Model file to write")->required();
    t->add_option("--report", train.report_path, "Report path (default <model>.report.json)");
    t->add_option("--hidden", train.hidden_units, "Hidden units");
    t->add_option("--max-epochs", train.max_epochs, "Epoch cap");
    t->add_option("--patience", train.patience, "Early-stopping patience in epochs");
    t->add_option("--seed", train.seed, "Split and initialization seed");
    t->add_flag("--delayed-features", train.delayed_features, "Use 16 inputs with one-step-delayed features");
    t->add_option("--activation", train.activation, "Hidden activation")
        ->check(CLI::IsMember({"tanh", "logistic"}));
    t->callback([&] { rc = invctl::cmd_train(train); });

    invctl::SimulateCli simulate;
    CLI::App* s = app.add_subcommand("simulate", "Run one scenario closed-loop and record waveforms");
    s->add_option("--scenarios", simulate.scenarios_path, "Scenario JSON file")->required();
    s->add_option("--id", simulate.scenario_id, "Scenario id (default: first in file)");
    s->add_option("--controller", simulate.controller, "mpc or ann")
        ->required()
        ->check(CLI::IsMember({"mpc", "ann"}));
    s->add_option("--model", simulate.model_path, "Model file (required for ann)");
    s->add_option("--output", simulate.output_csv, "Waveform CSV to write")->required();
    s->add_option("--metrics", simulate.metrics_path, "Metrics path (default <output>.metrics.json)");
    s->add_option("--substeps", simulate.substeps, "Integrator substeps per control period");
    s->add_flag("--advance-reference", simulate.advance_reference, "Track the one-period-ahead reference");
    s->add_flag("--ann-estimated-io", simulate.ann_estimated_io,
                "Feed the student the backward-difference output-current estimate");
    s->add_flag("--delayed-features", simulate.delayed_features, "Model uses 16 delayed-feature inputs");
    s->add_option("--max-harmonic", simulate.max_harmonic, "Highest harmonic order in THD");
    s->add_option("--settle-band", simulate.settle_band, "Settling tolerance band (fraction)");
    s->callback([&] { rc = invctl::cmd_simulate(simulate); });

    invctl::CompareCli compare;
    CLI::App* m = app.add_subcommand("compare", "Run both controllers over a scenario table");
    m->add_option("--scenarios", compare.scenarios_path, "Scenario JSON file")->required();
    m->add_option("--model", compare.model_path, "Trained model file")->required();
    m->add_option("--output", compare.output_csv, "Comparison CSV to write")->required();
    m->add_option("--manifest", compare.manifest_path, "Manifest path (default <output>.manifest.json)");
    m->add_option("--waveform-dir", compare.waveform_dir, "Dump per-scenario waveform CSVs here");
    m->add_option("--substeps", compare.substeps, "Integrator substeps per control period");
    m->add_flag("--advance-reference", compare.advance_reference, "Track the one-period-ahead reference");
    m->add_flag("--ann-estimated-io", compare.ann_estimated_io,
                "Feed the student the backward-difference output-current estimate");
    m->add_flag("--delayed-features", compare.delayed_features, "Model uses 16 delayed-feature inputs");
    m->add_option("--max-harmonic", compare.max_harmonic, "Highest harmonic order in THD");
    m->add_option("--settle-band", compare.settle_band, "Settling tolerance band (fraction)");
    m->callback([&] { rc = invctl::cmd_compare(compare); });

    invctl::ThdCli thd;
    CLI::App* h = app.add_subcommand("thd", "Harmonic analysis of one waveform CSV column");
    h->add_option("--input", thd.input_csv, "Waveform CSV (needs a t_s column)")->required();
    h->add_option("--column", thd.column, "Column to analyze");
    h->add_option("--fundamental", thd.fundamental, "Fundamental frequency in Hz");
    h->add_option("--max-harmonic", thd.max_harmonic, "Highest harmonic order");
    h->add_option("--skip-cycles", thd.skip_cycles, "Whole cycles to drop from the start");
    h->add_option("--cycles", thd.cycles, "Whole cycles to analyze (0 = all available)");
    h->callback([&] { rc = invctl::cmd_thd(thd); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? invctl::kExitOk : invctl::kExitUsage;
    }
    return rc;
}
