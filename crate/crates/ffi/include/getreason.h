#ifndef GETREASON_H
#define GETREASON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Marks an absent temporal unit.
#define GR_UNIT_ABSENT INT32_MIN

// Result code of every fallible call.
typedef enum GrStatus {
  GR_STATUS_OK = 0,
  GR_STATUS_NULL_POINTER = 1,
  GR_STATUS_INVALID_UTF8 = 2,
  GR_STATUS_INVALID_ARGUMENT = 3,
  GR_STATUS_NOT_FOUND = 4,
  GR_STATUS_IO = 5,
  GR_STATUS_SCORING_FAILED = 6,
  GR_STATUS_PANIC = 7,
} GrStatus;

// Weight profile for the overall score.
typedef enum GrProfile {
  GR_PROFILE_TARA = 0,
  GR_PROFILE_WIKITILO = 1,
} GrProfile;

// Opaque embedding provider handle.
typedef struct GrEmbedder GrEmbedder;

// Opaque gazetteer handle.
typedef struct GrGazetteer GrGazetteer;

// Temporal value; decades are start years, centuries ordinals.
typedef struct GrTemporal {
  int32_t century;
  int32_t decade;
  int32_t year;
  int32_t month;
  int32_t day;
} GrTemporal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Owned by the
// library; valid until the next call on the same thread.
const char *gr_last_error(void);

// Library version as a static string.
const char *gr_version(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void gr_string_free(char *s);

// The gazetteer compiled into the library.
//
// # Safety
// `out` must be a valid pointer.
enum GrStatus gr_gazetteer_bundled(struct GrGazetteer **out);

// Loads a gazetteer CSV (country,state_or_province,city,lat,lon).
//
// # Safety
// `path` must be a nul-terminated string; `out` a valid pointer.
enum GrStatus gr_gazetteer_open(const char *path, struct GrGazetteer **out);

// # Safety
// `gz` must be null or a handle from this library, freed once.
void gr_gazetteer_free(struct GrGazetteer *gz);

// Number of rows.
//
// # Safety
// `gz` must be a live handle; `out` a valid pointer.
enum GrStatus gr_gazetteer_len(const struct GrGazetteer *gz, size_t *out);

// Coordinates for a place name. Null name parts are absent. Returns
// `NotFound` when the name does not resolve.
//
// # Safety
// `gz` must be a live handle; strings null or nul-terminated; outs valid.
enum GrStatus gr_gazetteer_resolve(const struct GrGazetteer *gz,
                                   const char *country,
                                   const char *state,
                                   const char *city,
                                   double *out_lat,
                                   double *out_lon);

// Great-circle distance in km on a sphere of radius 6371 km.
//
// # Safety
// `out` must be a valid pointer.
enum GrStatus gr_haversine_km(double lat1, double lon1, double lat2, double lon2, double *out);

// Geospatial score of a predicted place against the ground truth.
//
// # Safety
// `gz` must be a live handle; strings null or nul-terminated; `out` valid.
enum GrStatus gr_geo_score(const struct GrGazetteer *gz,
                           const char *pred_country,
                           const char *pred_state,
                           const char *pred_city,
                           const char *gt_country,
                           const char *gt_state,
                           const char *gt_city,
                           double *out);

// Temporal score with the default tolerances and weights. Fails with
// `InvalidArgument` when the ground truth has no units.
//
// # Safety
// `pred`, `gt` and `out` must be valid pointers.
enum GrStatus gr_temporal_score(const struct GrTemporal *pred,
                                const struct GrTemporal *gt,
                                double *out);

// Offline bag-of-tokens embedder.
//
// # Safety
// `out` must be a valid pointer.
enum GrStatus gr_stub_embedder_new(size_t dim, struct GrEmbedder **out);

// # Safety
// `e` must be null or a handle from this library, freed once.
void gr_embedder_free(struct GrEmbedder *e);

// Event score of a predicted event/background pair against the ground truth.
//
// # Safety
// `e` must be a live handle; strings null or nul-terminated; `out` valid.
enum GrStatus gr_event_score(const struct GrEmbedder *e,
                             const char *pred_event,
                             const char *pred_background,
                             const char *gt_event,
                             const char *gt_background,
                             double *out);

// Profile-weighted overall score. `has_event` must be true exactly for
// profiles that weight the event score.
//
// # Safety
// `out` must be a valid pointer.
enum GrStatus gr_overall_score(double event,
                               bool has_event,
                               double geo,
                               double temporal,
                               enum GrProfile profile,
                               double *out);

// Scores one prediction against one dataset record and returns the score
// card as JSON. `record_json` is a dataset line; `prediction_json` is the
// `prediction` object of a predictions line. Free the result with
// [`gr_string_free`].
//
// # Safety
// Handles must be live; strings nul-terminated; `out` a valid pointer.
enum GrStatus gr_score_json(const struct GrGazetteer *gz,
                            const struct GrEmbedder *e,
                            enum GrProfile profile,
                            const char *record_json,
                            const char *prediction_json,
                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GETREASON_H */
