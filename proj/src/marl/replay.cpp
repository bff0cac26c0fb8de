#include "evcs/marl/replay.hpp"

#include <numeric>

#include "evcs/error.hpp"

namespace evcs::marl {

double EpisodeRecord::total_profit() const {
    double s = 0.0;
    for (double p : profit) s += p;
    return s;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
    items_.reserve(capacity);
}

void ReplayBuffer::push(EpisodeRecord record) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(record));
    } else {
        items_[next_] = std::move(record);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<const EpisodeRecord*> ReplayBuffer::sample(std::size_t count) {
    if (count > items_.size())
        throw ConfigError("cannot sample " + std::to_string(count) + " episodes from a buffer of " +
                          std::to_string(items_.size()));
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<const EpisodeRecord*> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
        std::swap(idx[k], idx[pick(rng_)]);
        out.push_back(&items_[idx[k]]);
    }
    return out;
}

}  // namespace evcs::marl
