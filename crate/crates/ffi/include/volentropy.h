#ifndef VOLENTROPY_H
#define VOLENTROPY_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum VeLogBase {
  VE_LOG_BASE_E = 0,
  VE_LOG_BASE_TWO = 1,
  VE_LOG_BASE_TEN = 2,
} VeLogBase;

typedef enum VeSide {
  VE_SIDE_BEFORE = 0,
  VE_SIDE_AFTER = 1,
} VeSide;

typedef enum VeStatus {
  VE_STATUS_OK = 0,
  VE_STATUS_NULL_POINTER = 1,
  VE_STATUS_INVALID_UTF8 = 2,
  VE_STATUS_INVALID_ARGUMENT = 3,
  VE_STATUS_PARSE = 4,
  VE_STATUS_INSUFFICIENT_DATA = 5,
  VE_STATUS_IO = 6,
  VE_STATUS_BUFFER_TOO_SMALL = 7,
  VE_STATUS_PANIC = 99,
} VeStatus;

// Return series on each side of an event date.
typedef struct VeEventSplit VeEventSplit;

typedef struct VeHistogram VeHistogram;

// Daily closing prices of one symbol.
typedef struct VePrices VePrices;

// Price series keyed by symbol, input to `ve_compare_universe_json`.
typedef struct VeStore VeStore;

typedef struct VeMeasureSet {
  double std_dev;
  double entropy;
  // Largest entropy the bin count allows, in the same base.
  double entropy_max;
  size_t n;
  size_t bins;
} VeMeasureSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *ve_last_error_message(void);

// Library version, a static string.
const char *ve_version(void);

void ve_string_free(char *s);

// Parse CSV text of daily closes (date column plus a close column).
enum VeStatus ve_prices_from_csv(const char *csv_text, const char *symbol, struct VePrices **out);

// Seeded Gaussian prices: `n` returns, `n + 1` weekday closes from 100.
enum VeStatus ve_prices_synth_gaussian(size_t n,
                                       double mu,
                                       double sigma,
                                       uint64_t seed,
                                       struct VePrices **out);

// Seeded regime switch: `n1` returns with `sigma1`, then `n2` with `sigma2`.
// The date of close `n1` (the switch) is written to `change_date_out` as a
// string to free with `ve_string_free` when that pointer is not NULL.
enum VeStatus ve_prices_synth_regime_switch(size_t n1,
                                            size_t n2,
                                            double mu,
                                            double sigma1,
                                            double sigma2,
                                            uint64_t seed,
                                            struct VePrices **out,
                                            char **change_date_out);

enum VeStatus ve_prices_len(const struct VePrices *prices, size_t *len_out);

enum VeStatus ve_prices_closes(const struct VePrices *prices,
                               double *buf,
                               size_t cap,
                               size_t *len_out);

// Daily log returns (or simple returns when `simple` is true).
enum VeStatus ve_prices_returns(const struct VePrices *prices,
                                bool simple,
                                double *buf,
                                size_t cap,
                                size_t *len_out);

void ve_prices_free(struct VePrices *prices);

// Sample standard deviation (N - 1 denominator).
enum VeStatus ve_std_dev(const double *values, size_t len, double *out);

// Symmetric percentage difference `100 |a - b| / ((a + b) / 2)`.
enum VeStatus ve_pct_difference(double a, double b, double *out);

// Entropy of `values` binned into `bins` equal-width min-max bins.
enum VeStatus ve_entropy(const double *values,
                         size_t len,
                         size_t bins,
                         enum VeLogBase base,
                         double *out);

enum VeStatus ve_measure_set(const double *values,
                             size_t len,
                             size_t bins,
                             enum VeLogBase base,
                             struct VeMeasureSet *out);

enum VeStatus ve_histogram_build(const double *values,
                                 size_t len,
                                 size_t bins,
                                 struct VeHistogram **out);

// Number of bins actually used: 1 when all values are equal.
enum VeStatus ve_histogram_bins(const struct VeHistogram *h, size_t *out);

enum VeStatus ve_histogram_counts(const struct VeHistogram *h,
                                  uint64_t *buf,
                                  size_t cap,
                                  size_t *len_out);

// Bin edges, one more than the number of bins.
enum VeStatus ve_histogram_edges(const struct VeHistogram *h,
                                 double *buf,
                                 size_t cap,
                                 size_t *len_out);

enum VeStatus ve_histogram_entropy(const struct VeHistogram *h, enum VeLogBase base, double *out);

void ve_histogram_free(struct VeHistogram *h);

// Split log returns around `event_date`; the event day belongs to the after
// side. `span` is like "1y", "6m" or "90d"; NULL means one year.
enum VeStatus ve_split_at_event(const struct VePrices *prices,
                                const char *event_date,
                                const char *span,
                                struct VeEventSplit **out);

enum VeStatus ve_split_returns(const struct VeEventSplit *split,
                               enum VeSide side,
                               double *buf,
                               size_t cap,
                               size_t *len_out);

// Whether the data stops well short of the requested window on `side`.
enum VeStatus ve_split_is_short(const struct VeEventSplit *split, enum VeSide side, bool *out);

enum VeStatus ve_split_measures(const struct VeEventSplit *split,
                                enum VeSide side,
                                size_t bins,
                                enum VeLogBase base,
                                struct VeMeasureSet *out);

void ve_split_free(struct VeEventSplit *split);

struct VeStore *ve_store_new(void);

// Add a copy of `prices` under its symbol, replacing any earlier entry.
enum VeStatus ve_store_add(struct VeStore *store, const struct VePrices *prices);

void ve_store_free(struct VeStore *store);

// Before/after comparison table as JSON. `universe_text` uses the universe
// file format; NULL selects the bundled WIG20 universe. `span` NULL means
// one year. The JSON string is released with `ve_string_free`.
enum VeStatus ve_compare_universe_json(const char *universe_text,
                                       const struct VeStore *store,
                                       const char *event_date,
                                       const char *span,
                                       size_t bins,
                                       enum VeLogBase base,
                                       size_t jobs,
                                       char **json_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOLENTROPY_H */
