#ifndef MULTIVERSE_KIT_H
#define MULTIVERSE_KIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MkStatus {
  MK_STATUS_OK = 0,
  MK_STATUS_NULL_POINTER = 1,
  MK_STATUS_INVALID_UTF8 = 2,
  MK_STATUS_PARSE_ERROR = 3,
  MK_STATUS_INVALID_INPUT = 4,
  MK_STATUS_RESOURCE_LIMIT = 5,
  MK_STATUS_PANIC = 6,
} MkStatus;

/*
 Parsed modal formula.
 */
typedef struct MkFormula MkFormula;

/*
 Multiverse graph for geology queries.
 */
typedef struct MkGraph MkGraph;

/*
 Kripke model.
 */
typedef struct MkModel MkModel;

/*
 Buttons-and-switches multiverse.
 */
typedef struct MkMultiverse MkMultiverse;

/*
 Boolean-valued structure.
 */
typedef struct MkStructure MkStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *mk_last_error(void);

/*
 Release a string returned by this library.

 # Safety
 `s` must be null or a pointer obtained from this library, not yet freed.
 */
void mk_string_free(char *s);

/*
 # Safety
 `src` must be a NUL-terminated string; `out` must be writable.
 */
enum MkStatus mk_formula_parse(const char *src, struct MkFormula **out);

/*
 Canonical text of a formula.

 # Safety
 `f` must be a live formula handle; `out` must be writable.
 */
enum MkStatus mk_formula_render(const struct MkFormula *f, char **out);

/*
 # Safety
 `f` must be a live formula handle; `out` must be writable.
 */
enum MkStatus mk_formula_modal_depth(const struct MkFormula *f, size_t *out);

/*
 # Safety
 `f` must be null or a handle from `mk_formula_parse`, not yet freed.
 */
void mk_formula_free(struct MkFormula *f);

/*
 Model from `{"worlds": n, "edges": [[u, v], ...], "valuation": {...}}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MkStatus mk_model_from_json(const char *json, struct MkModel **out);

/*
 # Safety
 `m` must be a live model handle; `out` must be writable.
 */
enum MkStatus mk_model_to_json(const struct MkModel *m, char **out);

/*
 Truth of `f` at world `w`.

 # Safety
 `m` and `f` must be live handles; `out` must be writable.
 */
enum MkStatus mk_model_eval(const struct MkModel *m,
                            size_t w,
                            const struct MkFormula *f,
                            bool *out);

/*
 # Safety
 `m` must be null or a live model handle.
 */
void mk_model_free(struct MkModel *m);

/*
 Decide `f` in the named theory; writes the verdict as JSON.

 # Safety
 `theory` must be a NUL-terminated string, `f` a live handle, `out` writable.
 */
enum MkStatus mk_decide(const char *theory, const struct MkFormula *f, size_t bound, char **out);

/*
 # Safety
 `out` must be writable.
 */
enum MkStatus mk_multiverse_new(size_t buttons, size_t switches, struct MkMultiverse **out);

/*
 # Safety
 `mv` must be a live handle; `out` must be writable.
 */
enum MkStatus mk_multiverse_state_count(const struct MkMultiverse *mv, size_t *out);

/*
 Trichotomy report at `state` as JSON.

 # Safety
 `mv` must be a live handle; `out` must be writable.
 */
enum MkStatus mk_multiverse_trichotomy(const struct MkMultiverse *mv, size_t state, char **out);

/*
 # Safety
 `mv` must be null or a live handle.
 */
void mk_multiverse_free(struct MkMultiverse *mv);

/*
 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MkStatus mk_structure_from_json(const char *json, struct MkStructure **out);

/*
 Boolean value of a sentence, as a bit mask over the atoms.

 # Safety
 `s` must be a live handle, `formula` a NUL-terminated string, `out` writable.
 */
enum MkStatus mk_structure_value(const struct MkStructure *s, const char *formula, uint64_t *out);

/*
 Equality-axiom report as JSON.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum MkStatus mk_structure_check_equality(const struct MkStructure *s, char **out);

/*
 # Safety
 `s` must be null or a live handle.
 */
void mk_structure_free(struct MkStructure *s);

/*
 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MkStatus mk_graph_from_json(const char *json, struct MkGraph **out);

/*
 Grounds, bedrocks, ground axiom and mantle of `world` as JSON.

 # Safety
 `g` must be a live handle; `out` must be writable.
 */
enum MkStatus mk_graph_analyze(const struct MkGraph *g, uint64_t world, char **out);

/*
 # Safety
 `g` must be null or a live handle.
 */
void mk_graph_free(struct MkGraph *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIVERSE_KIT_H */
