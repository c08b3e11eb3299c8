#ifndef EQISA_H
#define EQISA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EqisaStatus {
  EQISA_STATUS_OK = 0,
  EQISA_STATUS_NULL_POINTER = 1,
  EQISA_STATUS_INVALID_ARGUMENT = 2,
  EQISA_STATUS_PARSE = 3,
  EQISA_STATUS_CAPACITY = 4,
  EQISA_STATUS_INTEGRITY = 5,
  EQISA_STATUS_NUMERICAL = 6,
  EQISA_STATUS_IO = 7,
  EQISA_STATUS_PANIC = 8,
} EqisaStatus;

/**
 * Encoded program with the codebook it was written with.
 */
typedef struct EqisaProgram EqisaProgram;

/**
 * Trained toolchain.
 */
typedef struct EqisaToolchain EqisaToolchain;

/**
 * Byte buffer owned by the library; release with [`eqisa_bytes_free`].
 */
typedef struct EqisaBytes {
  uint8_t *data;
  size_t len;
} EqisaBytes;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *eqisa_version(void);

/**
 * Message of the last failed call on this thread; empty after success. Valid
 * until the next call on this thread.
 */
const char *eqisa_last_error(void);

/**
 * Non-null elements in the {H, T, Tdg} basis of the given depth.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EqisaStatus eqisa_basis_size(uint32_t depth, uint64_t *out);

/**
 * Trains a toolchain. `config` is a key = value text or null for defaults.
 *
 * # Safety
 * `config` is null or NUL-terminated; `out` must be a valid pointer.
 */
enum EqisaStatus eqisa_toolchain_train(const char *config_text, struct EqisaToolchain **out);

/**
 * Loads artifacts written by [`eqisa_toolchain_save`] or `eqisa train`.
 *
 * # Safety
 * `config` is null or NUL-terminated; `dir` is NUL-terminated; `out` must be valid.
 */
enum EqisaStatus eqisa_toolchain_load(const char *config_text,
                                      const char *dir,
                                      struct EqisaToolchain **out);

/**
 * # Safety
 * `tc` is a live toolchain handle; `dir` is NUL-terminated.
 */
enum EqisaStatus eqisa_toolchain_save(const struct EqisaToolchain *tc, const char *dir);

/**
 * # Safety
 * `tc` is null or a handle from this library that has not been freed.
 */
void eqisa_toolchain_free(struct EqisaToolchain *tc);

/**
 * Lowers and encodes QASM source with variant 0..=3.
 *
 * # Safety
 * `tc` is a live handle; `qasm` is NUL-terminated; `out` must be valid.
 */
enum EqisaStatus eqisa_encode_qasm(const struct EqisaToolchain *tc,
                                   const char *qasm,
                                   uint8_t variant,
                                   struct EqisaProgram **out);

/**
 * Payload bits (instruction plus qubit-id streams, header excluded).
 *
 * # Safety
 * `p` is null or a live program handle.
 */
uint64_t eqisa_program_total_bits(const struct EqisaProgram *p);

/**
 * Instructions in the encoded stream.
 *
 * # Safety
 * `p` is null or a live program handle.
 */
uint64_t eqisa_program_token_count(const struct EqisaProgram *p);

/**
 * Serialized `.eqisa` bytes.
 *
 * # Safety
 * `p` is a live program handle; `out` must be valid.
 */
enum EqisaStatus eqisa_program_bytes(const struct EqisaProgram *p, struct EqisaBytes *out);

/**
 * Codebook text the program was encoded with.
 *
 * # Safety
 * `p` is a live program handle; `out` must be valid. Free the result with
 * [`eqisa_string_free`].
 */
enum EqisaStatus eqisa_program_codebook(const struct EqisaProgram *p, char **out);

/**
 * # Safety
 * `p` is null or a handle from this library that has not been freed.
 */
void eqisa_program_free(struct EqisaProgram *p);

/**
 * Decodes `.eqisa` bytes (or a `.eqbz` container holding them) to QASM text.
 * `codebook` is codebook text or null for the trained codebook.
 *
 * # Safety
 * `tc` is a live handle; `data` points to `len` bytes; `codebook` is null or
 * NUL-terminated; `out` must be valid. Free the result with [`eqisa_string_free`].
 */
enum EqisaStatus eqisa_decode_to_qasm(const struct EqisaToolchain *tc,
                                      const uint8_t *data,
                                      size_t len,
                                      const char *codebook,
                                      char **out);

/**
 * # Safety
 * `data` points to `len` readable bytes; `out` must be valid.
 */
enum EqisaStatus eqisa_compress(const uint8_t *data, size_t len, struct EqisaBytes *out);

/**
 * # Safety
 * `data` points to `len` readable bytes; `out` must be valid.
 */
enum EqisaStatus eqisa_decompress(const uint8_t *data, size_t len, struct EqisaBytes *out);

/**
 * # Safety
 * `b` was filled by this library and has not been freed.
 */
void eqisa_bytes_free(struct EqisaBytes b);

/**
 * # Safety
 * `s` is null or a string returned by this library that has not been freed.
 */
void eqisa_string_free(char *s);

/**
 * An empty buffer, for initializing out-parameters.
 */
struct EqisaBytes eqisa_bytes_empty(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQISA_H */
