#include "blendplan/schedule.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <random>
#include <variant>

namespace blendplan {

using detail::Json;

namespace {

using Int128 = __int128;

BigInt bigint_from_i128(Int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                            : static_cast<unsigned __int128>(v);
  BigInt out = static_cast<std::uint64_t>(u >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(u);
  return neg ? -out : out;
}

Int128 i128_from_bigint(const BigInt& v) {
  BigInt a = v < 0 ? BigInt(-v) : v;
  unsigned __int128 u =
      (static_cast<unsigned __int128>((a >> 64).convert_to<std::uint64_t>())
       << 64) |
      static_cast<unsigned __int128>(
          (a & BigInt(std::numeric_limits<std::uint64_t>::max()))
              .convert_to<std::uint64_t>());
  Int128 out = static_cast<Int128>(u);
  return v < 0 ? -out : out;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  if (a > std::numeric_limits<std::int64_t>::max() - b)
    fail(ErrorCode::BudgetOverflow, "token budget too large for this quantum");
  return (a + b - 1) / b;
}

// Exact weighted interleaving over integer credits with denominator `denom`.
// Each step adds the weight numerator to every credit, then serves the
// eligible source (credit >= weight, i.e. the fluid schedule has started its
// next quantum) with the earliest fluid finish time (denom - credit)/weight.
// Ties fall to the lexicographically smallest source id, which is the lowest
// index here because sources are sorted. Keeps every per-source count within
// one quantum of n*weight.
template <typename T>
struct CreditEngine {
  T denom{};
  std::vector<T> w1, w2, credit;
  bool phase2 = false;

  const std::vector<T>& weights() const { return phase2 ? w2 : w1; }

  int step() {
    const auto& w = weights();
    const std::size_t k = credit.size();
    for (std::size_t i = 0; i < k; ++i) credit[i] += w[i];
    int pick = -1;
    bool pick_eligible = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (w[i] == 0) continue;
      const bool eligible = credit[i] >= w[i];
      const int c = static_cast<int>(i);
      if (pick < 0) {
        pick = c;
        pick_eligible = eligible;
        continue;
      }
      if (eligible != pick_eligible) {
        if (eligible) {
          pick = c;
          pick_eligible = true;
        }
        continue;
      }
      if ((denom - credit[i]) * w[pick] < (denom - credit[pick]) * w[i])
        pick = c;
    }
    if (pick < 0)
      throw std::logic_error("schedule step with no positive weights");
    credit[pick] -= denom;
    return pick;
  }
};

struct SourceState {
  std::string id;
  std::vector<ShardSlice> slices;
  std::int64_t available = 0;
  std::size_t shard_idx = 0;
  std::int64_t offset = 0;
  std::int64_t epoch = 0;
};

void advance(SourceState& s, std::int64_t amount) {
  while (amount > 0) {
    if (s.shard_idx == 0 && s.offset == 0 && amount >= s.available) {
      s.epoch += amount / s.available;
      amount %= s.available;
      if (amount == 0) break;
    }
    const ShardSlice& slice = s.slices[s.shard_idx];
    std::int64_t room = slice.tokens - s.offset;
    if (amount < room) {
      s.offset += amount;
      amount = 0;
    } else {
      amount -= room;
      s.offset = 0;
      if (++s.shard_idx == s.slices.size()) {
        s.shard_idx = 0;
        ++s.epoch;
      }
    }
  }
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  // Mask-and-reject keeps the draw deterministic across platforms.
  std::uint64_t mask = std::bit_ceil(bound) - 1;
  for (;;) {
    std::uint64_t v = rng() & mask;
    if (v < bound) return v;
  }
}

}  // namespace

const char* ordering_name(Ordering ordering) {
  return ordering == Ordering::TwoPhase ? "two_phase" : "random";
}

Ordering ordering_from_name(const std::string& name) {
  if (name == "two_phase" || name == "two-phase") return Ordering::TwoPhase;
  if (name == "random" || name == "random_order" || name == "random-order")
    return Ordering::RandomOrder;
  fail(ErrorCode::ParseError, "unknown ordering '" + name + "'");
}

struct ScheduleStream::Impl {
  std::int64_t quantum = 0;
  Ordering ordering = Ordering::TwoPhase;
  std::int64_t n1 = 0;
  std::int64_t n_total = 0;
  std::int64_t step = 0;
  std::vector<SourceState> sources;
  BigInt denom;
  std::variant<CreditEngine<Int128>, CreditEngine<BigInt>> engine;
  std::vector<std::uint32_t> draw_order;  // random ordering only

  Impl(const TrainingPlan& plan, const Manifest& manifest,
       const ScheduleConfig& config) {
    if (config.quantum <= 0)
      fail(ErrorCode::DomainError, "quantum must be positive");
    if (config.workers < 1)
      fail(ErrorCode::DomainError, "workers must be at least 1");
    quantum = config.quantum;
    ordering = config.ordering;

    const std::int64_t b1 = plan.phase1.token_budget;
    const std::int64_t b2 = plan.phase2.token_budget;
    if (b1 < 0 || b2 < 0)
      fail(ErrorCode::DomainError, "phase budgets must be non-negative");
    if (b1 > 0)
      throw_if_diagnostics(validate_blend(plan.phase1.blend, manifest),
                           "phase-1 blend");
    if (b2 > 0)
      throw_if_diagnostics(validate_blend(plan.phase2.blend, manifest),
                           "phase-2 blend");
    n1 = b1 > 0 ? ceil_div(b1, quantum) : 0;
    const std::int64_t n2 = b2 > 0 ? ceil_div(b2, quantum) : 0;
    n_total = n1 + n2;

    auto r1 = b1 > 0 ? resolve_blend(plan.phase1.blend, manifest)
                     : BlendResolution{};
    auto r2 = b2 > 0 ? resolve_blend(plan.phase2.blend, manifest)
                     : BlendResolution{};
    auto share_of = [&](const BlendResolution& r,
                        const DataSource* s) -> Rational {
      for (const auto& share : r.shares)
        if (share.source == s) return share.weight;
      return 0;
    };

    std::vector<std::pair<Rational, Rational>> weights;  // aligned to sources
    for (const auto& src : manifest.sources()) {
      Rational a = share_of(r1, &src), b = share_of(r2, &src);
      if (a == 0 && b == 0) continue;
      SourceState state;
      state.id = src.id;
      state.slices = manifest.available_shards(src);
      state.available = manifest.available_tokens(src);
      if (state.slices.empty())
        fail(ErrorCode::EmptyShardList,
             "source '" + src.id + "' has no available tokens to schedule");
      sources.push_back(std::move(state));
      weights.emplace_back(std::move(a), std::move(b));
    }
    std::vector<std::size_t> order(sources.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sources[a].id < sources[b].id;
    });
    {
      std::vector<SourceState> ss;
      std::vector<std::pair<Rational, Rational>> ww;
      for (std::size_t i : order) {
        ss.push_back(std::move(sources[i]));
        ww.push_back(std::move(weights[i]));
      }
      sources = std::move(ss);
      weights = std::move(ww);
    }

    denom = 1;
    for (const auto& [a, b] : weights) {
      denom = lcm(denom, denominator(a));
      denom = lcm(denom, denominator(b));
    }
    auto numerators = [&](auto select) {
      std::vector<BigInt> out;
      for (const auto& w : weights) {
        const Rational& r = select(w);
        out.push_back(numerator(r) * (denom / denominator(r)));
      }
      return out;
    };
    std::vector<BigInt> p1 =
        numerators([](const auto& w) -> const Rational& { return w.first; });
    std::vector<BigInt> p2 =
        numerators([](const auto& w) -> const Rational& { return w.second; });

    // Deadline comparisons multiply values bounded by 2*denom with weight
    // numerators bounded by denom; pick the narrowest integer type that
    // cannot overflow.
    if (2 * denom * denom < (BigInt(1) << 126)) {
      CreditEngine<Int128> e;
      e.denom = i128_from_bigint(denom);
      for (std::size_t i = 0; i < sources.size(); ++i) {
        e.w1.push_back(i128_from_bigint(p1[i]));
        e.w2.push_back(i128_from_bigint(p2[i]));
        e.credit.push_back(0);
      }
      engine = std::move(e);
    } else {
      CreditEngine<BigInt> e;
      e.denom = denom;
      e.w1 = std::move(p1);
      e.w2 = std::move(p2);
      e.credit.assign(sources.size(), BigInt(0));
      engine = std::move(e);
    }

    if (ordering == Ordering::RandomOrder) {
      if (n_total > (std::int64_t(1) << 31))
        fail(ErrorCode::BudgetOverflow,
             "random ordering materializes the draw order; schedule too large");
      draw_order.reserve(static_cast<std::size_t>(n_total));
      std::visit(
          [&](auto& e) {
            auto scratch = e;
            for (std::int64_t i = 0; i < n_total; ++i) {
              scratch.phase2 = i >= n1;
              draw_order.push_back(static_cast<std::uint32_t>(scratch.step()));
            }
          },
          engine);
      std::mt19937_64 rng(config.seed);
      for (std::size_t i = draw_order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
        std::swap(draw_order[i - 1], draw_order[j]);
      }
    }
  }

  std::optional<ScheduleItem> next() {
    if (step >= n_total) return std::nullopt;
    int winner;
    if (ordering == Ordering::RandomOrder) {
      winner = static_cast<int>(draw_order[static_cast<std::size_t>(step)]);
    } else {
      winner = std::visit(
          [&](auto& e) {
            e.phase2 = step >= n1;
            return e.step();
          },
          engine);
    }
    SourceState& s = sources[static_cast<std::size_t>(winner)];
    ScheduleItem item;
    item.index = step;
    item.source_id = s.id;
    item.shard_id = s.slices[s.shard_idx].id;
    item.offset = s.offset;
    item.quantum = quantum;
    advance(s, quantum);
    ++step;
    return item;
  }

  BigInt credit_of(std::size_t i) const {
    return std::visit(
        [&](const auto& e) -> BigInt {
          using T = std::decay_t<decltype(e.credit[i])>;
          if constexpr (std::is_same_v<T, BigInt>)
            return e.credit[i];
          else
            return bigint_from_i128(e.credit[i]);
        },
        engine);
  }

  void set_credit(std::size_t i, const BigInt& value) {
    std::visit(
        [&](auto& e) {
          using T = std::decay_t<decltype(e.credit[i])>;
          if constexpr (std::is_same_v<T, BigInt>)
            e.credit[i] = value;
          else
            e.credit[i] = i128_from_bigint(value);
        },
        engine);
  }
};

ScheduleStream::ScheduleStream(std::unique_ptr<Impl> impl)
    : impl_(std::move(impl)) {}

ScheduleStream::ScheduleStream(const TrainingPlan& plan,
                               const Manifest& manifest,
                               const ScheduleConfig& config)
    : impl_(std::make_unique<Impl>(plan, manifest, config)) {}

ScheduleStream::ScheduleStream(ScheduleStream&&) noexcept = default;
ScheduleStream& ScheduleStream::operator=(ScheduleStream&&) noexcept = default;
ScheduleStream::~ScheduleStream() = default;

std::optional<ScheduleItem> ScheduleStream::next() { return impl_->next(); }

std::int64_t ScheduleStream::total_items() const { return impl_->n_total; }

std::int64_t ScheduleStream::items_emitted() const { return impl_->step; }

ScheduleCursor ScheduleStream::cursor() const {
  const Impl& im = *impl_;
  ScheduleCursor cur;
  cur.ordering = im.ordering;
  cur.quantum = im.quantum;
  cur.phase = im.ordering == Ordering::RandomOrder ? 0
              : im.step < im.n1                    ? 1
                                                   : 2;
  cur.step = im.step;
  if (im.ordering == Ordering::TwoPhase)
    for (std::size_t i = 0; i < im.sources.size(); ++i)
      cur.credits.emplace_back(
          im.sources[i].id,
          to_fraction_string(Rational(im.credit_of(i), im.denom)));
  for (const auto& s : im.sources)
    cur.sources.push_back({s.id, s.slices[s.shard_idx].id, s.offset, s.epoch});
  return cur;
}

ScheduleStream ScheduleStream::resume(const TrainingPlan& plan,
                                      const Manifest& manifest,
                                      const ScheduleConfig& config,
                                      const ScheduleCursor& cursor) {
  auto impl = std::make_unique<Impl>(plan, manifest, config);
  Impl& im = *impl;
  if (cursor.ordering != im.ordering)
    fail(ErrorCode::DomainError, "cursor ordering does not match the config");
  if (cursor.quantum != im.quantum)
    fail(ErrorCode::DomainError, "cursor quantum does not match the config");
  if (cursor.step < 0 || cursor.step > im.n_total)
    fail(ErrorCode::DomainError, "cursor step out of range");
  im.step = cursor.step;

  if (im.ordering == Ordering::TwoPhase) {
    if (cursor.credits.size() != im.sources.size())
      fail(ErrorCode::DomainError,
           "cursor credit count does not match the schedule sources");
    for (const auto& [id, text] : cursor.credits) {
      auto it = std::find_if(im.sources.begin(), im.sources.end(),
                             [&](const SourceState& s) { return s.id == id; });
      if (it == im.sources.end())
        fail(ErrorCode::DomainError, "cursor credit for unknown source '" + id + "'");
      Rational value = parse_rational(text) * im.denom;
      if (denominator(value) != 1)
        fail(ErrorCode::DomainError,
             "cursor credit for '" + id + "' is not exact at this denominator");
      im.set_credit(static_cast<std::size_t>(it - im.sources.begin()),
                    numerator(value));
    }
  }
  for (const auto& state : cursor.sources) {
    auto it = std::find_if(
        im.sources.begin(), im.sources.end(),
        [&](const SourceState& s) { return s.id == state.source_id; });
    if (it == im.sources.end())
      fail(ErrorCode::DomainError,
           "cursor state for unknown source '" + state.source_id + "'");
    auto slice = std::find_if(
        it->slices.begin(), it->slices.end(),
        [&](const ShardSlice& s) { return s.id == state.shard_id; });
    if (slice == it->slices.end())
      fail(ErrorCode::DomainError, "cursor names unknown shard '" +
                                       state.shard_id + "' of source '" +
                                       state.source_id + "'");
    if (state.offset < 0 || state.offset >= slice->tokens)
      fail(ErrorCode::DomainError, "cursor offset out of shard bounds");
    it->shard_idx = static_cast<std::size_t>(slice - it->slices.begin());
    it->offset = state.offset;
    it->epoch = state.epoch;
  }
  return ScheduleStream(std::move(impl));
}

PartitionedStream::PartitionedStream(ScheduleStream stream, int worker,
                                     int workers)
    : stream_(std::move(stream)), worker_(worker), workers_(workers) {
  if (workers < 1 || worker < 0 || worker >= workers)
    fail(ErrorCode::DomainError, "worker index must satisfy 0 <= worker < workers");
}

std::optional<ScheduleItem> PartitionedStream::next() {
  while (auto item = stream_.next())
    if (item->index % workers_ == worker_) return item;
  return std::nullopt;
}

PartitionedStream partition_for_worker(ScheduleStream stream, int worker,
                                       int workers) {
  return PartitionedStream(std::move(stream), worker, workers);
}

namespace {

template <typename S>
std::map<std::string, std::int64_t> prefix_counts_impl(S& stream,
                                                       std::int64_t n) {
  if (n < 0) fail(ErrorCode::DomainError, "prefix length must be non-negative");
  std::map<std::string, std::int64_t> counts;
  for (std::int64_t i = 0; i < n; ++i) {
    auto item = stream.next();
    if (!item) break;
    counts[std::string(item->source_id)]++;
  }
  return counts;
}

}  // namespace

std::map<std::string, std::int64_t> prefix_counts(ScheduleStream& stream,
                                                  std::int64_t n) {
  return prefix_counts_impl(stream, n);
}

std::map<std::string, std::int64_t> prefix_counts(PartitionedStream& stream,
                                                  std::int64_t n) {
  return prefix_counts_impl(stream, n);
}

ScheduleCursor cursor_from_json_string(const std::string& text) {
  Json j = detail::parse_json(text, "cursor");
  ScheduleCursor cur;
  cur.ordering =
      ordering_from_name(detail::require_string(j, "ordering", "cursor"));
  cur.quantum = detail::require_int(j, "quantum", "cursor");
  cur.phase = static_cast<int>(detail::require_int(j, "phase", "cursor"));
  cur.step = detail::require_int(j, "step", "cursor");
  if (j.contains("credits"))
    for (const auto& cj : j.at("credits"))
      cur.credits.emplace_back(detail::require_string(cj, "source", "credit"),
                               detail::require_string(cj, "credit", "credit"));
  for (const auto& sj : detail::require(j, "sources", "cursor")) {
    CursorSourceState s;
    s.source_id = detail::require_string(sj, "source", "cursor source");
    s.shard_id = detail::require_string(sj, "shard", "cursor source");
    s.offset = detail::require_int(sj, "offset", "cursor source");
    s.epoch = detail::require_int(sj, "epoch", "cursor source");
    cur.sources.push_back(std::move(s));
  }
  return cur;
}

std::string cursor_to_json_string(const ScheduleCursor& cursor) {
  Json j;
  j["ordering"] = ordering_name(cursor.ordering);
  j["quantum"] = cursor.quantum;
  j["phase"] = cursor.phase;
  j["step"] = cursor.step;
  if (!cursor.credits.empty()) {
    Json credits = Json::array();
    for (const auto& [source, credit] : cursor.credits)
      credits.push_back(Json{{"source", source}, {"credit", credit}});
    j["credits"] = std::move(credits);
  }
  Json sources = Json::array();
  for (const auto& s : cursor.sources)
    sources.push_back(Json{{"source", s.source_id},
                           {"shard", s.shard_id},
                           {"offset", s.offset},
                           {"epoch", s.epoch}});
  j["sources"] = std::move(sources);
  return detail::dump_json(j);
}

namespace detail_export {

void tsv_line(std::ostream& out, const ScheduleItem& item) {
  // std::to_string keeps the format locale-independent
  std::string line = std::to_string(item.index);
  line += '\t';
  line += item.source_id;
  line += '\t';
  line += item.shard_id;
  line += '\t';
  line += std::to_string(item.offset);
  line += '\t';
  line += std::to_string(item.quantum);
  line += '\n';
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
}

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void put_u64le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

}  // namespace

BinaryScheduleWriter::BinaryScheduleWriter(const Manifest& manifest,
                                           std::ostream& out)
    : out_(out) {
  out_.write("BLENDSCH", 8);
  put_u32le(out_, 1);  // version
  put_u32le(out_, 0);  // reserved
  std::uint64_t ordinal = 0;
  for (const auto& source : manifest.sources()) {
    source_ordinal_[source.id] = ordinal++;
    auto& shards = shard_ordinal_[source.id];
    std::uint64_t shard_idx = 0;
    for (const auto& slice : manifest.available_shards(source))
      shards[slice.id] = shard_idx++;
  }
}

void BinaryScheduleWriter::write(const ScheduleItem& item) {
  auto src = source_ordinal_.find(item.source_id);
  if (src == source_ordinal_.end())
    fail(ErrorCode::UnknownSource,
         "schedule item names a source outside the manifest");
  const auto& shards = shard_ordinal_.find(item.source_id)->second;
  auto shard = shards.find(item.shard_id);
  if (shard == shards.end())
    fail(ErrorCode::UnknownSource,
         "schedule item names a shard outside the manifest");
  put_u64le(out_, src->second);
  put_u64le(out_, shard->second);
  put_u64le(out_, static_cast<std::uint64_t>(item.offset));
  put_u64le(out_, static_cast<std::uint64_t>(item.quantum));
}

}  // namespace detail_export

}  // namespace blendplan
