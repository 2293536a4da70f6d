// Copyright 2026 sxl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sxl/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace sxl {

namespace {

// Little-endian binary reader that tracks its byte offset for error
// reporting.
class Reader {
 public:
  Reader(std::istream& is, const std::string& path) : is_(is), path_(path) {}

  std::uint64_t offset() const { return offset_; }

  void read_bytes(void* dst, std::size_t n, const char* what) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      throw FormatError(path_ + ": truncated file while reading " +
                            std::string(what),
                        offset_);
    }
    offset_ += n;
  }

  std::uint32_t read_u32(const char* what) {
    std::uint8_t b[4];
    read_bytes(b, 4, what);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }

  float read_f32(const char* what) {
    const std::uint32_t u = read_u32(what);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }

  std::string read_string(std::size_t n, const char* what) {
    std::string s(n, '\0');
    if (n) read_bytes(s.data(), n, what);
    return s;
  }

  bool at_eof() {
    is_.peek();
    return is_.eof();
  }

 private:
  std::istream& is_;
  std::string path_;
  std::uint64_t offset_ = 0;
};

void write_u32(std::ostream& os, std::uint32_t v) {
  const std::uint8_t b[4] = {
      static_cast<std::uint8_t>(v & 0xff),
      static_cast<std::uint8_t>((v >> 8) & 0xff),
      static_cast<std::uint8_t>((v >> 16) & 0xff),
      static_cast<std::uint8_t>((v >> 24) & 0xff),
  };
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& os, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  write_u32(os, u);
}

void check_magic(Reader& r, const char* expect, const std::string& path) {
  char magic[4];
  r.read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, expect, 4) != 0) {
    throw FormatError(path + ": bad magic, expected \"" + expect + "\"", 0);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open for reading: " + path);
  return is;
}

constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void save_features(const std::vector<FeatureSequence>& corpus,
                   const std::string& path) {
  auto os = open_out(path);
  os.write("SXLF", 4);
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(corpus.size()));
  for (const auto& seq : corpus) {
    write_u32(os, static_cast<std::uint32_t>(seq.utterance_id.size()));
    os.write(seq.utterance_id.data(),
             static_cast<std::streamsize>(seq.utterance_id.size()));
    write_u32(os, static_cast<std::uint32_t>(seq.num_frames));
    write_u32(os, static_cast<std::uint32_t>(seq.feat_dim));
    for (const float v : seq.frames) write_f32(os, v);
  }
  if (!os) throw InputError("write failed: " + path);
}

std::vector<FeatureSequence> load_features(const std::string& path) {
  auto is = open_in(path);
  Reader r(is, path);
  check_magic(r, "SXLF", path);
  const std::uint32_t version = r.read_u32("version");
  if (version != kFormatVersion) {
    throw FormatError(path + ": unsupported version " +
                          std::to_string(version),
                      4);
  }
  const std::uint32_t count = r.read_u32("utterance count");
  std::vector<FeatureSequence> corpus;
  corpus.reserve(count);
  for (std::uint32_t u = 0; u < count; ++u) {
    FeatureSequence seq;
    const std::uint32_t id_len = r.read_u32("id length");
    seq.utterance_id = r.read_string(id_len, "utterance id");
    seq.num_frames = static_cast<int>(r.read_u32("frame count"));
    seq.feat_dim = static_cast<int>(r.read_u32("feature dim"));
    if (seq.num_frames < 1 || seq.feat_dim < 1) {
      throw FormatError(path + ": utterance \"" + seq.utterance_id +
                            "\" has empty geometry",
                        r.offset());
    }
    const std::size_t n = static_cast<std::size_t>(seq.num_frames) *
                          static_cast<std::size_t>(seq.feat_dim);
    seq.frames.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t at = r.offset();
      seq.frames[i] = r.read_f32("frame data");
      if (!std::isfinite(seq.frames[i])) {
        throw FormatError(path + ": non-finite value in utterance \"" +
                              seq.utterance_id + "\"",
                          at);
      }
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

void save_labels(const std::vector<std::vector<int>>& labels,
                 const std::string& path) {
  auto os = open_out(path);
  os.write("SXLL", 4);
  write_u32(os, kFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(labels.size()));
  for (const auto& seq : labels) {
    write_u32(os, static_cast<std::uint32_t>(seq.size()));
    for (const int l : seq) write_u32(os, static_cast<std::uint32_t>(l));
  }
  if (!os) throw InputError("write failed: " + path);
}

std::vector<std::vector<int>> load_labels(const std::string& path) {
  auto is = open_in(path);
  Reader r(is, path);
  check_magic(r, "SXLL", path);
  const std::uint32_t version = r.read_u32("version");
  if (version != kFormatVersion) {
    throw FormatError(path + ": unsupported version " +
                          std::to_string(version),
                      4);
  }
  const std::uint32_t count = r.read_u32("utterance count");
  std::vector<std::vector<int>> labels;
  labels.reserve(count);
  for (std::uint32_t u = 0; u < count; ++u) {
    const std::uint32_t n = r.read_u32("label count");
    std::vector<int> seq(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      seq[i] = static_cast<int>(r.read_u32("label"));
    }
    labels.push_back(std::move(seq));
  }
  return labels;
}

LabeledCorpus load_labeled_corpus(const std::string& features_path,
                                  const std::string& labels_path) {
  LabeledCorpus corpus;
  corpus.sequences = load_features(features_path);
  corpus.labels = load_labels(labels_path);
  if (corpus.sequences.size() != corpus.labels.size()) {
    throw InputError("feature/label utterance counts differ: " +
                     std::to_string(corpus.sequences.size()) + " vs " +
                     std::to_string(corpus.labels.size()));
  }
  int max_label = -1;
  for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
    if (static_cast<int>(corpus.labels[i].size()) !=
        corpus.sequences[i].num_frames) {
      throw InputError("label length mismatch for utterance \"" +
                       corpus.sequences[i].utterance_id + "\"");
    }
    for (const int l : corpus.labels[i]) max_label = std::max(max_label, l);
  }
  corpus.num_classes = max_label + 1;
  return corpus;
}

CmvnStats compute_global_cmvn(const std::vector<FeatureSequence>& corpus) {
  std::int64_t total = 0;
  int dim = 0;
  for (const auto& seq : corpus) {
    total += seq.num_frames;
    dim = seq.feat_dim;
  }
  if (total == 0) throw InputError("compute_global_cmvn: empty corpus");

  CmvnStats stats;
  stats.mean.assign(static_cast<std::size_t>(dim), 0.0);
  stats.variance.assign(static_cast<std::size_t>(dim), 0.0);
  stats.frame_count = total;
  for (const auto& seq : corpus) {
    if (seq.feat_dim != dim) {
      throw InputError("compute_global_cmvn: feature dims differ across corpus");
    }
    for (int t = 0; t < seq.num_frames; ++t)
      for (int f = 0; f < dim; ++f)
        stats.mean[static_cast<std::size_t>(f)] += seq.at(t, f);
  }
  for (auto& m : stats.mean) m /= static_cast<double>(total);
  for (const auto& seq : corpus) {
    for (int t = 0; t < seq.num_frames; ++t)
      for (int f = 0; f < dim; ++f) {
        const double c = seq.at(t, f) - stats.mean[static_cast<std::size_t>(f)];
        stats.variance[static_cast<std::size_t>(f)] += c * c;
      }
  }
  for (auto& v : stats.variance) v /= static_cast<double>(total);
  return stats;
}

FeatureSequence apply_cmvn(const FeatureSequence& seq, const CmvnStats& stats,
                           double variance_floor) {
  if (static_cast<int>(stats.mean.size()) != seq.feat_dim) {
    throw InputError("apply_cmvn: stats dim " +
                     std::to_string(stats.mean.size()) + " vs features dim " +
                     std::to_string(seq.feat_dim));
  }
  FeatureSequence out = seq;
  for (int f = 0; f < seq.feat_dim; ++f) {
    const double inv_std =
        1.0 / std::sqrt(std::max(stats.variance[static_cast<std::size_t>(f)],
                                 variance_floor));
    for (int t = 0; t < seq.num_frames; ++t) {
      out.at(t, f) = static_cast<float>(
          (seq.at(t, f) - stats.mean[static_cast<std::size_t>(f)]) * inv_std);
    }
  }
  return out;
}

FeatureSequence stack_frames(const FeatureSequence& seq, int stack, int skip) {
  if (stack < 1 || skip < 1) {
    throw InputError("stack_frames: stack and skip must be >= 1");
  }
  const int t_in = seq.num_frames;
  const int t_out = (t_in + skip - 1) / skip;  // ceil(T / skip)
  FeatureSequence out;
  out.utterance_id = seq.utterance_id;
  out.num_frames = t_out;
  out.feat_dim = stack * seq.feat_dim;
  out.frames.resize(static_cast<std::size_t>(t_out) *
                    static_cast<std::size_t>(out.feat_dim));
  for (int i = 0; i < t_out; ++i) {
    for (int s = 0; s < stack; ++s) {
      const int src = std::min(i * skip + s, t_in - 1);  // pad by repetition
      std::memcpy(&out.frames[(static_cast<std::size_t>(i) * out.feat_dim) +
                              static_cast<std::size_t>(s) * seq.feat_dim],
                  &seq.frames[static_cast<std::size_t>(src) * seq.feat_dim],
                  sizeof(float) * static_cast<std::size_t>(seq.feat_dim));
    }
  }
  return out;
}

std::vector<int> subsample_labels(const std::vector<int>& labels, int orig_T,
                                  int skip) {
  if (skip < 1) throw InputError("subsample_labels: skip must be >= 1");
  const int t_out = (orig_T + skip - 1) / skip;
  std::vector<int> out(static_cast<std::size_t>(t_out));
  for (int i = 0; i < t_out; ++i) {
    out[static_cast<std::size_t>(i)] =
        labels[static_cast<std::size_t>(std::min(i * skip, orig_T - 1))];
  }
  return out;
}

std::vector<FeatureSequence> prepare_features(
    const std::vector<FeatureSequence>& corpus, const PipelineConfig& cfg) {
  std::vector<FeatureSequence> out;
  out.reserve(corpus.size());
  if (cfg.cmvn) {
    const auto stats = compute_global_cmvn(corpus);
    for (const auto& seq : corpus) {
      out.push_back(apply_cmvn(seq, stats, cfg.variance_floor));
    }
  } else {
    out = corpus;
  }
  if (cfg.stack != 1 || cfg.skip != 1) {
    for (auto& seq : out) seq = stack_frames(seq, cfg.stack, cfg.skip);
  }
  return out;
}

LabeledCorpus prepare_labeled(const LabeledCorpus& corpus,
                              const PipelineConfig& cfg) {
  LabeledCorpus out;
  out.num_classes = corpus.num_classes;
  out.sequences = prepare_features(corpus.sequences, cfg);
  out.labels.reserve(corpus.labels.size());
  for (std::size_t i = 0; i < corpus.labels.size(); ++i) {
    if (cfg.skip != 1) {
      out.labels.push_back(subsample_labels(
          corpus.labels[i], corpus.sequences[i].num_frames, cfg.skip));
    } else {
      out.labels.push_back(corpus.labels[i]);
    }
  }
  return out;
}

LabeledCorpus gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_utts < 1 || cfg.num_classes < 1 || cfg.feat_dim < 1 ||
      cfg.min_frames < 1 || cfg.max_frames < cfg.min_frames) {
    throw InputError("gen_synthetic: invalid configuration");
  }
  // Class geometry and dynamics. mean_scale sets how separable the classes
  // are relative to unit noise; ar_rho makes the within-state noise a smooth
  // process so each frame is largely predictable from its neighbors.
  constexpr double kMeanScale = 0.42;
  constexpr double kNoiseSigma = 1.0;
  constexpr double kArRho = 0.9;
  constexpr double kStayProb = 0.88;

  Rng rng(Rng::derive(cfg.seed, {0x5f3e7u}));
  std::vector<std::vector<double>> means(
      static_cast<std::size_t>(cfg.num_classes));
  for (auto& m : means) {
    m.resize(static_cast<std::size_t>(cfg.feat_dim));
    for (auto& v : m) v = kMeanScale * rng.normal();
  }

  LabeledCorpus corpus;
  corpus.num_classes = cfg.num_classes;
  corpus.sequences.reserve(static_cast<std::size_t>(cfg.num_utts));
  corpus.labels.reserve(static_cast<std::size_t>(cfg.num_utts));
  const double innov = kNoiseSigma * std::sqrt(1.0 - kArRho * kArRho);
  for (int u = 0; u < cfg.num_utts; ++u) {
    const int t_len =
        cfg.min_frames +
        static_cast<int>(rng.below(
            static_cast<std::uint64_t>(cfg.max_frames - cfg.min_frames + 1)));
    FeatureSequence seq;
    seq.utterance_id = "synth-" + std::to_string(u);
    seq.num_frames = t_len;
    seq.feat_dim = cfg.feat_dim;
    seq.frames.resize(static_cast<std::size_t>(t_len) *
                      static_cast<std::size_t>(cfg.feat_dim));
    std::vector<int> labels(static_cast<std::size_t>(t_len));

    int state = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(cfg.num_classes)));
    std::vector<double> noise(static_cast<std::size_t>(cfg.feat_dim));
    for (auto& n : noise) n = kNoiseSigma * rng.normal();
    for (int t = 0; t < t_len; ++t) {
      if (t > 0 && rng.uniform() >= kStayProb && cfg.num_classes > 1) {
        // Jump to a uniformly chosen different state.
        const int jump = 1 + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(cfg.num_classes - 1)));
        state = (state + jump) % cfg.num_classes;
      }
      labels[static_cast<std::size_t>(t)] = state;
      for (int f = 0; f < cfg.feat_dim; ++f) {
        if (t > 0) {
          noise[static_cast<std::size_t>(f)] =
              kArRho * noise[static_cast<std::size_t>(f)] +
              innov * rng.normal();
        }
        seq.at(t, f) = static_cast<float>(
            means[static_cast<std::size_t>(state)][static_cast<std::size_t>(f)] +
            noise[static_cast<std::size_t>(f)]);
      }
    }
    corpus.sequences.push_back(std::move(seq));
    corpus.labels.push_back(std::move(labels));
  }
  return corpus;
}

}  // namespace sxl
