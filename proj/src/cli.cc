/*
 * Copyright 2026 The saaet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "saaet/cli.h"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "saaet/error.h"
#include "saaet/matrix_io.h"
#include "saaet/subspace.h"
#include "saaet/text_attack.h"
#include "saaet/theory.h"

namespace saaet {
namespace {

namespace fs = std::filesystem;

template <typename T>
T ParseConfigNumber(const std::string& key, const std::string& text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  Require(res.ec == std::errc() && res.ptr == text.data() + text.size(),
          "bad value '" + text + "' for config key '" + key + "'");
  return value;
}

std::vector<double> ParseScales(const std::string& text) {
  std::vector<double> scales;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    scales.push_back(ParseConfigNumber<double>("scales", item));
  }
  Require(!scales.empty(), "scales list is empty");
  return scales;
}

SubTriangle ParseRegion(const std::string& text) {
  Require(text.size() == 1, "region must be a single letter A-F");
  return SubTriangleFromLetter(text[0]);
}

std::string JoinTokens(const Caption& c) {
  std::string s;
  for (std::size_t i = 0; i < c.tokens.size(); ++i) {
    if (i > 0) s += ' ';
    s += std::to_string(c.tokens[i]);
  }
  return s;
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// Flags shared by every subcommand.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  bool entropy = false;
  std::string config_path;
  int jobs = 1;
  // Overrides; applied after the config file.
  std::optional<double> eps_image, alpha, kappa, mu, nu, proportion;
  std::optional<int> steps, samples, word_list_size, text_budget, pairs,
      pool_size;
  std::optional<std::string> region;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "Master seed (required unless --entropy)");
  cmd->add_flag("--entropy", f.entropy,
                "Draw the seed from the system entropy source");
  cmd->add_option("--config", f.config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--eps", f.eps_image, "Image L-inf budget");
  cmd->add_option("--alpha", f.alpha, "Image step size");
  cmd->add_option("--steps", f.steps, "Attack iterations T");
  cmd->add_option("--samples", f.samples, "Triangle samples m per iteration");
  cmd->add_option("--kappa", f.kappa, "Text objective weight on the clean image");
  cmd->add_option("--mu", f.mu, "Text objective weight on x~^{T-1}");
  cmd->add_option("--nu", f.nu, "Text objective weight on x~^T");
  cmd->add_option("--word-list-size", f.word_list_size,
                  "Substitution candidates per position");
  cmd->add_option("--text-budget", f.text_budget, "Changeable words");
  cmd->add_option("--region", f.region, "Sub-triangle A-F");
  cmd->add_option("--proportion", f.proportion, "Semantic corpus proportion");
  cmd->add_option("--pairs", f.pairs, "Dataset pairs");
  cmd->add_option("--pool-size", f.pool_size, "Models in the pool");
}

RunConfig ResolveConfig(const CommonFlags& f) {
  RunConfig config;
  if (!f.config_path.empty()) {
    ApplyConfigValues(ReadKeyValueFile(f.config_path), config);
  }
  AttackConfig& a = config.attack;
  if (f.eps_image) a.eps_image = *f.eps_image;
  if (f.alpha) a.alpha = *f.alpha;
  if (f.steps) a.steps = *f.steps;
  if (f.samples) a.samples = *f.samples;
  if (f.kappa) a.kappa = *f.kappa;
  if (f.mu) a.mu = *f.mu;
  if (f.nu) a.nu = *f.nu;
  if (f.word_list_size) a.word_list_size = *f.word_list_size;
  if (f.text_budget) a.text_budget = *f.text_budget;
  if (f.region) a.region = ParseRegion(*f.region);
  if (f.proportion) a.corpus_proportion = *f.proportion;
  if (f.pairs) config.dataset.pairs = *f.pairs;
  if (f.pool_size) config.pool.size = *f.pool_size;
  return config;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t ResolveSeed(const CommonFlags& f, std::ostream& out) {
  if (f.seed) return *f.seed;
  if (!f.entropy) {
    throw UsageError("--seed is required (or opt in to --entropy)");
  }
  std::random_device device;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(device()) << 32) ^ device();
  out << "seed=" << seed << '\n';
  return seed;
}

SyntheticDataset LoadDataset(const std::string& path) {
  return SynthDataset(ReadDatasetDescriptor(path));
}

std::vector<ImageTensor> Images(const SyntheticDataset& ds) {
  std::vector<ImageTensor> v;
  for (const ImageCaptionPair& p : ds.pairs) v.push_back(p.image);
  return v;
}

std::vector<Caption> Captions(const SyntheticDataset& ds) {
  std::vector<Caption> v;
  for (const ImageCaptionPair& p : ds.pairs) v.push_back(p.caption);
  return v;
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    Fail(ErrorCode::kIo, "cannot create directory '" + dir + "'");
  }
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  return out;
}

// ---- synth ----

struct SynthFlags {
  std::string out_path;
  std::string models_dir;
};

int CmdSynth(const CommonFlags& common, const SynthFlags& flags,
             std::ostream& out) {
  RunConfig config = ResolveConfig(common);
  config.dataset.seed = ResolveSeed(common, out);
  const SyntheticDataset ds = SynthDataset(config.dataset);
  WriteDatasetDescriptor(config.dataset, flags.out_path);

  const EncoderPair base = BaseEncoders(ds);
  const auto images = Images(ds);
  const auto captions = Captions(ds);
  const double tr = RecallAt1(
      EvaluateRetrieval(base, images, captions,
                        RetrievalDirection::kTextRetrieval).ranks);
  const double ir = RecallAt1(
      EvaluateRetrieval(base, images, captions,
                        RetrievalDirection::kImageRetrieval).ranks);
  const DatasetSpec& s = config.dataset;
  out << "pairs=" << s.pairs << " image=" << s.height << "x" << s.width
      << " dim=" << s.dim << " vocab=" << s.vocab
      << " caption_length=" << s.caption_length << '\n'
      << "clean_r1_tr=" << Fmt("%.2f", tr) << " clean_r1_ir=" << Fmt("%.2f", ir)
      << '\n';

  if (!flags.models_dir.empty()) {
    EnsureDirectory(flags.models_dir);
    WriteModel(base, flags.models_dir + "/base.model");
    for (const EncoderPair& m : BuildModelPool(ds, config.pool)) {
      WriteModel(m, flags.models_dir + "/" + m.id() + ".model");
    }
    out << "models written to " << flags.models_dir << '\n';
  }
  return kExitOk;
}

// ---- attack ----

struct AttackFlags {
  std::string dataset_path;
  std::string model_path;
  std::string projector_path;
  std::string variant = "saaet";
  std::string out_dir;
};

bool WithinBudget(const ImageTensor& adv, const ImageTensor& clean,
                  double eps) {
  const Eigen::VectorXd diff = adv.pixels() - clean.pixels();
  return diff.cwiseAbs().maxCoeff() <= eps + 1e-12 &&
         adv.pixels().minCoeff() >= 0.0 && adv.pixels().maxCoeff() <= 1.0;
}

int CmdAttack(const CommonFlags& common, const AttackFlags& flags,
              std::ostream& out, std::ostream& err) {
  RunConfig config = ResolveConfig(common);
  config.attack.master_seed = ResolveSeed(common, out);
  config.attack.Validate();
  const AttackVariant variant = VariantByName(flags.variant);
  const SyntheticDataset ds = LoadDataset(flags.dataset_path);
  const EncoderPair model = ReadModel(flags.model_path);
  std::optional<ProjectionBasis> projector;
  if (!flags.projector_path.empty()) projector = ReadProjector(flags.projector_path);

  const std::vector<AdversarialPair> results = AttackDataset(
      ds, model, variant, config.attack, common.jobs,
      projector ? &*projector : nullptr);

  EnsureDirectory(flags.out_dir);
  EnsureDirectory(flags.out_dir + "/traces");
  {
    std::ofstream images = OpenOut(flags.out_dir + "/adv_images.txt");
    images << results.size() << '\n';
    for (const AdversarialPair& r : results) WriteImage(r.image.adversarial, images);
    if (!images.flush()) Fail(ErrorCode::kIo, "failed writing adv_images.txt");
  }
  {
    std::ofstream captions = OpenOut(flags.out_dir + "/captions.csv");
    captions << "pair,original,adversarial,substituted\n";
    for (std::size_t p = 0; p < results.size(); ++p) {
      captions << p << ',' << JoinTokens(ds.pairs[p].caption) << ','
               << JoinTokens(results[p].text.adversarial) << ','
               << (results[p].text.substituted ? 1 : 0) << '\n';
    }
    if (!captions.flush()) Fail(ErrorCode::kIo, "failed writing captions.csv");
  }
  for (std::size_t p = 0; p < results.size(); ++p) {
    char name[32];
    std::snprintf(name, sizeof(name), "/traces/pair_%04zu.csv", p);
    std::ofstream trace = OpenOut(flags.out_dir + name);
    WriteTraceCsv(results[p].image.trace, trace);
    if (!trace.flush()) Fail(ErrorCode::kIo, std::string("failed writing ") + name);
  }

  // Budget check over every iterate and over the images as written.
  std::size_t violations = 0;
  std::ifstream reread(flags.out_dir + "/adv_images.txt");
  std::size_t count = 0;
  reread >> count;
  if (count != results.size()) Fail(ErrorCode::kIo, "adv_images.txt is truncated");
  for (std::size_t p = 0; p < results.size(); ++p) {
    const ImageTensor& clean = ds.pairs[p].image;
    for (const ImageTensor& it : results[p].image.trace.iterates) {
      if (!WithinBudget(it, clean, config.attack.eps_image)) ++violations;
    }
    if (!WithinBudget(ReadImage(reread), clean, config.attack.eps_image)) ++violations;
    if (HammingDistance(results[p].text.adversarial, ds.pairs[p].caption) >
        static_cast<std::size_t>(config.attack.text_budget)) {
      ++violations;
    }
  }
  std::size_t substituted = 0;
  for (const AdversarialPair& r : results) substituted += r.text.substituted;
  out << "variant=" << variant.name << " pairs=" << results.size()
      << " substituted=" << substituted << " budget_violations=" << violations
      << '\n';
  if (violations > 0) {
    err << "budget check failed on " << violations << " item(s)\n";
    return kExitVerification;
  }
  return kExitOk;
}

// ---- transfer ----

struct TransferFlags {
  std::string dataset_path;
  std::string variant = "saaet";
  std::string out_path;
};

int CmdTransfer(const CommonFlags& common, const TransferFlags& flags,
                std::ostream& out) {
  RunConfig config = ResolveConfig(common);
  config.attack.master_seed = ResolveSeed(common, out);
  const AttackVariant variant = VariantByName(flags.variant);
  const SyntheticDataset ds = LoadDataset(flags.dataset_path);
  const std::vector<EncoderPair> pool = BuildModelPool(ds, config.pool);
  const std::vector<ExperimentReport> reports =
      RunTransferExperiment(ds, pool, variant, config.attack, common.jobs);
  WriteReport(reports, flags.out_path);
  out << "variant=" << variant.name << " rows=" << reports.size()
      << " mean_transfer_asr=" << Fmt("%.2f", MeanTransferAsr(reports))
      << " min_white_box_asr=" << Fmt("%.2f", MinWhiteBoxAsr(reports))
      << " mean_transfer_alpha=" << Fmt("%.4f", MeanTransferAlpha(reports))
      << '\n';
  return kExitOk;
}

// ---- theory ----

struct TheoryFlags {
  int instances = 50;
  int dim = 16;
  int t_max = 50;
  double beta = 0.25;
  double gamma = 0.25;
  std::string out_path;
};

int CmdTheory(const CommonFlags& common, const TheoryFlags& flags,
              std::ostream& out) {
  const std::uint64_t seed = ResolveSeed(common, out);
  Require(flags.instances >= 1, "--instances must be positive");
  std::vector<TheoremRow> mean;
  int passed = 0;
  double worst_identity = 0.0, worst_cubic = 0.0, worst_gap = 0.0;
  Cubic difference{};
  for (int i = 0; i < flags.instances; ++i) {
    Rng rng = StreamRng(seed, {static_cast<std::uint64_t>(i)});
    const QuadraticLoss ql = RandomQuadraticLossWithPositiveB(flags.dim, rng);
    const TheoremReport report =
        VerifyTheorem(ql, flags.beta, flags.gamma, flags.t_max);
    passed += report.passed;
    worst_identity = std::max({worst_identity, report.identity_proposed_error,
                               report.identity_sga_error});
    worst_cubic = std::max({worst_cubic, report.cubic_proposed_error,
                            report.cubic_sga_error});
    if (i == 0) {
      mean = report.rows;
      difference = report.polynomial_difference;
    } else {
      for (std::size_t r = 0; r < mean.size(); ++r) {
        mean[r].e_proposed += report.rows[r].e_proposed;
        mean[r].e_sga += report.rows[r].e_sga;
        mean[r].gap += report.rows[r].gap;
      }
    }
    for (const TheoremRow& row : report.rows) {
      worst_gap = std::max(worst_gap, std::abs(row.gap));
    }
  }
  {
    std::ofstream csv = OpenOut(flags.out_path);
    csv << "t,e_proposed,e_sga,gap\n";
    csv.precision(17);
    for (const TheoremRow& row : mean) {
      csv << row.t << ',' << row.e_proposed / flags.instances << ','
          << row.e_sga / flags.instances << ',' << row.gap / flags.instances
          << '\n';
    }
    if (!csv.flush()) Fail(ErrorCode::kIo, "failed writing " + flags.out_path);
  }
  out << "instances=" << flags.instances << " passed=" << passed
      << " beta=" << flags.beta << " gamma=" << flags.gamma << '\n'
      << "max_identity_error=" << Fmt("%.3e", worst_identity)
      << " max_cubic_error=" << Fmt("%.3e", worst_cubic)
      << " max_abs_gap=" << Fmt("%.6g", worst_gap) << '\n'
      << "stated_minus_derived_polynomial(instance 0, t^0..t^3)="
      << Fmt("%.6g", difference[0]) << ',' << Fmt("%.6g", difference[1]) << ','
      << Fmt("%.6g", difference[2]) << ',' << Fmt("%.6g", difference[3])
      << '\n';
  const bool ok = passed == flags.instances;
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitOk : kExitVerification;
}

// ---- subspace ----

struct SubspaceFlags {
  std::string dataset_path;
  std::string model_path;
  std::string out_path;
};

int CmdSubspace(const CommonFlags& common, const SubspaceFlags& flags,
                std::ostream& out) {
  RunConfig config = ResolveConfig(common);
  config.attack.master_seed = ResolveSeed(common, out);
  config.attack.Validate();
  const SyntheticDataset ds = LoadDataset(flags.dataset_path);
  const EncoderPair model =
      flags.model_path.empty() ? BaseEncoders(ds) : ReadModel(flags.model_path);
  const ProjectionBasis pb = ModelProjection(ds, model, config.attack);
  WriteProjector(pb, flags.out_path);
  const Eigen::MatrixXd& P = pb.projector();
  const double idempotence = (P * P - P).cwiseAbs().maxCoeff();
  out << "corpus_proportion=" << config.attack.corpus_proportion
      << " rank=" << pb.rank() << " dim=" << pb.dim()
      << " idempotence_residual=" << Fmt("%.3e", idempotence) << '\n';
  return idempotence < 1e-9 ? kExitOk : kExitVerification;
}

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupportedBudget:
      return kExitUsage;
    default:
      return kExitVerification;
  }
}

}  // namespace

void ApplyConfigValues(const std::map<std::string, std::string>& values,
                       RunConfig& config) {
  AttackConfig& a = config.attack;
  DatasetSpec& d = config.dataset;
  PoolSpec& p = config.pool;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      field = ParseConfigNumber<double>(k, v);
    };
  };
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      field = ParseConfigNumber<int>(k, v);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"eps_image", real(a.eps_image)},
      {"alpha", real(a.alpha)},
      {"steps", integer(a.steps)},
      {"samples", integer(a.samples)},
      {"scales", [&a](const std::string&, const std::string& v) {
         a.scales = ParseScales(v);
       }},
      {"text_budget", integer(a.text_budget)},
      {"word_list_size", integer(a.word_list_size)},
      {"kappa", real(a.kappa)},
      {"mu", real(a.mu)},
      {"nu", real(a.nu)},
      {"corpus_proportion", real(a.corpus_proportion)},
      {"region", [&a](const std::string&, const std::string& v) {
         a.region = ParseRegion(v);
       }},
      {"pairs", integer(d.pairs)},
      {"height", integer(d.height)},
      {"width", integer(d.width)},
      {"dim", integer(d.dim)},
      {"vocab", integer(d.vocab)},
      {"caption_length", integer(d.caption_length)},
      {"latent_dim", integer(d.latent_dim)},
      {"held_out", integer(d.held_out)},
      {"image_contrast", real(d.image_contrast)},
      {"redundancy", real(d.redundancy)},
      {"pool_size", integer(p.size)},
      {"manifold_noise", real(p.manifold_noise)},
      {"redundant_noise", real(p.redundant_noise)},
      {"text_noise", real(p.text_noise)},
  };
  for (const auto& [key, value] : values) {
    const auto it = setters.find(key);
    Require(it != setters.end(), "unknown config key '" + key + "'");
    it->second(key, value);
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Adversarial evolution triangle attacks on toy vision-language "
               "models",
               "saaet"};
  app.require_subcommand(1);

  CommonFlags common;
  SynthFlags synth_flags;
  AttackFlags attack_flags;
  TransferFlags transfer_flags;
  TheoryFlags theory_flags;
  SubspaceFlags subspace_flags;

  CLI::App* synth = app.add_subcommand("synth", "Write a seeded dataset descriptor");
  AddCommonFlags(synth, common);
  synth->add_option("--out", synth_flags.out_path, "Descriptor path")->required();
  synth->add_option("--models-dir", synth_flags.models_dir,
                    "Also write the base model and the model pool here");

  CLI::App* attack = app.add_subcommand("attack", "Attack every pair on one model");
  AddCommonFlags(attack, common);
  attack->add_option("--dataset", attack_flags.dataset_path, "Dataset descriptor")
      ->required();
  attack->add_option("--model", attack_flags.model_path, "Surrogate model file")
      ->required();
  attack->add_option("--projector", attack_flags.projector_path,
                     "Projector file (default: built from the held-out pool)");
  attack->add_option("--variant", attack_flags.variant,
                     "saaet | sga | dra | subtriangle-X");
  attack->add_option("--out-dir", attack_flags.out_dir, "Output directory")
      ->required();

  CLI::App* transfer = app.add_subcommand("transfer", "Transfer matrix over a model pool");
  AddCommonFlags(transfer, common);
  transfer->add_option("--dataset", transfer_flags.dataset_path, "Dataset descriptor")
      ->required();
  transfer->add_option("--variant", transfer_flags.variant,
                       "saaet | sga | dra | subtriangle-X");
  transfer->add_option("--out", transfer_flags.out_path, "Report CSV path")
      ->required();

  CLI::App* theory = app.add_subcommand("theory", "Verify the interaction theorem");
  AddCommonFlags(theory, common);
  theory->add_option("--instances", theory_flags.instances, "Random quadratic losses");
  theory->add_option("--dim", theory_flags.dim, "Dimension of each loss");
  theory->add_option("--t-max", theory_flags.t_max, "Largest step t");
  theory->add_option("--beta", theory_flags.beta, "Weight on delta_{t-2}");
  theory->add_option("--gamma", theory_flags.gamma, "Weight on delta_{t-1}");
  theory->add_option("--out", theory_flags.out_path, "CSV path")->required();

  CLI::App* subspace = app.add_subcommand("subspace", "Build the semantic projector");
  AddCommonFlags(subspace, common);
  subspace->add_option("--dataset", subspace_flags.dataset_path, "Dataset descriptor")
      ->required();
  subspace->add_option("--model", subspace_flags.model_path,
                       "Model file (default: the dataset's base model)");
  subspace->add_option("--out", subspace_flags.out_path, "Projector path")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const std::vector<CLI::App*> chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return CmdSynth(common, synth_flags, out);
    if (attack->parsed()) return CmdAttack(common, attack_flags, out, err);
    if (transfer->parsed()) return CmdTransfer(common, transfer_flags, out);
    if (theory->parsed()) return CmdTheory(common, theory_flags, out);
    if (subspace->parsed()) return CmdSubspace(common, subspace_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return ExitFor(e.code());
  }
  return kExitUsage;
}

}  // namespace saaet
